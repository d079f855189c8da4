// src/backend.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tda/backend.hpp"

#include <sys/wait.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <httplib.h>
#include <json.hpp>
#include <unistd.h>

#include "tda/errors.hpp"
#include "tda/parallel.hpp"
#include "tda/text_metrics.hpp"

namespace tda {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

std::filesystem::path make_temp_wav_path() {
  static std::atomic<std::uint64_t> counter{0};
  const std::uint64_t n = counter.fetch_add(1);
  return std::filesystem::temp_directory_path() /
         ("tda-" + std::to_string(::getpid()) + "-" + std::to_string(n) + ".wav");
}

std::string run_command(const CommandBackend& backend, const AudioClip& clip) {
  const std::filesystem::path wav = make_temp_wav_path();
  write_wav(clip, wav);

  std::string cmd = shell_quote(backend.program);
  for (const std::string& arg : backend.args) {
    std::string expanded = arg;
    for (std::size_t pos; (pos = expanded.find("{}")) != std::string::npos;) {
      expanded.replace(pos, 2, wav.string());
    }
    cmd += " " + shell_quote(expanded);
  }

  std::string output;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(wav);
    throw TranscriptionError("command backend: cannot launch: " + backend.program);
  }
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
  const int status = ::pclose(pipe);
  std::filesystem::remove(wav);

  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw TranscriptionError("command backend: nonzero exit from: " + backend.program);
  }
  // protocol: exactly one line of transcript on stdout
  const std::size_t nl = output.find('\n');
  if (nl != std::string::npos) output.resize(nl);
  return output;
}

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

ParsedUrl parse_http_url(const std::string& url) {
  const std::string prefix = "http://";
  if (url.rfind(prefix, 0) != 0) {
    throw TranscriptionError("http backend: only http:// URLs are supported: " + url);
  }
  ParsedUrl p;
  std::string rest = url.substr(prefix.size());
  const std::size_t slash = rest.find('/');
  std::string hostport = (slash == std::string::npos) ? rest : rest.substr(0, slash);
  if (slash != std::string::npos) p.path = rest.substr(slash);
  const std::size_t colon = hostport.find(':');
  if (colon == std::string::npos) {
    p.host = hostport;
  } else {
    p.host = hostport.substr(0, colon);
    p.port = std::stoi(hostport.substr(colon + 1));
  }
  if (p.host.empty()) throw TranscriptionError("http backend: empty host in URL: " + url);
  return p;
}

std::string run_http(const HttpBackend& backend, const AudioClip& clip) {
  const ParsedUrl url = parse_http_url(backend.url);
  const std::string body = wav_bytes(clip);

  httplib::Client client(url.host, url.port);
  client.set_connection_timeout(backend.timeout_seconds, 0);
  client.set_read_timeout(backend.timeout_seconds, 0);

  httplib::Result res = client.Post(url.path, body, "audio/wav");
  if (!res) {  // transient transport failure: one retry
    res = client.Post(url.path, body, "audio/wav");
  }
  if (!res) {
    throw TranscriptionError("http backend: cannot reach " + backend.url + " (" +
                             httplib::to_string(res.error()) + ")");
  }
  if (res->status != 200) {
    throw TranscriptionError("http backend: status " + std::to_string(res->status) + " from " +
                             backend.url);
  }
  nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("text") ||
      !parsed["text"].is_string()) {
    throw TranscriptionError("http backend: response is not a JSON object with a \"text\" field");
  }
  return parsed["text"].get<std::string>();
}

}  // namespace

std::string backend_name(const Backend& b) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ToyBackend>) return "toy";
        if constexpr (std::is_same_v<T, CommandBackend>) return "command";
        if constexpr (std::is_same_v<T, HttpBackend>) return "http";
        if constexpr (std::is_same_v<T, ScriptedBackend>) return "scripted";
      },
      b);
}

std::string transcribe(const Backend& backend, const AudioClip& clip) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ToyBackend>) {
          if (!v.model) throw TranscriptionError("toy backend: no model loaded");
          return transcribe(*v.model, clip);
        } else if constexpr (std::is_same_v<T, CommandBackend>) {
          return normalize_text(run_command(v, clip));
        } else if constexpr (std::is_same_v<T, HttpBackend>) {
          return normalize_text(run_http(v, clip));
        } else {
          const auto it = v.table.find(clip.id);
          if (it == v.table.end()) {
            throw TranscriptionError("scripted backend: no transcript for id \"" + clip.id + "\"");
          }
          return normalize_text(it->second);
        }
      },
      backend);
}

std::vector<BatchResult> transcribe_batch(const Backend& backend,
                                          const std::vector<AudioClip>& clips, int workers) {
  std::vector<BatchResult> results(clips.size());
  if (const auto* http = std::get_if<HttpBackend>(&backend)) {
    workers = std::min(workers, std::max(1, http->max_in_flight));
  }
  parallel_for(clips.size(), workers, [&](std::size_t i) {
    BatchResult& r = results[i];
    r.id = clips[i].id;
    try {
      r.transcript = transcribe(backend, clips[i]);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
  });
  return results;
}

}  // namespace tda

// tests/test_backend.cpp
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <sys/stat.h>
#include <thread>
#include <vector>

#include "tda/audio.hpp"
#include "tda/backend.hpp"
#include "tda/errors.hpp"
#include "tda/toy_asr.hpp"

using namespace tda;

namespace {

AudioClip tiny_clip(std::string id) {
  AudioClip clip;
  clip.id = std::move(id);
  clip.sample_rate = kDefaultSampleRate;
  clip.samples = {0, 1000, -1000, 500};
  return clip;
}

// Self-deleting executable shell script for command-backend tests.
class ScriptFile {
 public:
  explicit ScriptFile(const std::string& body) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tda-test-script-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)) + ".sh");
    std::ofstream out(path_);
    out << "#!/bin/sh\n" << body;
    out.close();
    ::chmod(path_.c_str(), 0755);
  }
  ~ScriptFile() { std::filesystem::remove(path_); }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace

TEST_CASE("scripted backend looks up by id and normalizes") {
  ScriptedBackend sb;
  sb.table["c1"] = "abc def";
  sb.table["c2"] = "  Abc!!  DEF ";
  const Backend backend = sb;
  CHECK(backend_name(backend) == "scripted");
  CHECK(transcribe(backend, tiny_clip("c1")) == "abc def");
  CHECK(transcribe(backend, tiny_clip("c2")) == "abc def");
  CHECK_THROWS_AS((void)transcribe(backend, tiny_clip("missing")), TranscriptionError);
}

TEST_CASE("toy backend matches the model's own transcription") {
  auto model = std::make_shared<const ToyRnn>(ToyRnn::random_init(RnnDims{}, 4, 0.05));
  const AudioClip clip = synthesize("ab cd", "t", 9);
  const Backend backend = ToyBackend{model};
  CHECK(backend_name(backend) == "toy");
  CHECK(transcribe(backend, clip) == transcribe(*model, clip));
  CHECK_THROWS_AS((void)transcribe(Backend{ToyBackend{}}, clip), TranscriptionError);
}

TEST_CASE("command backend runs a process per clip") {
  const AudioClip clip = tiny_clip("cmd");

  SUBCASE("fixed output, normalized") {
    ScriptFile script("echo 'Good Day'\n");
    const Backend backend = CommandBackend{script.str(), {"{}"}};
    CHECK(backend_name(backend) == "command");
    CHECK(transcribe(backend, clip) == "good day");
  }
  SUBCASE("receives a readable non-empty wav path for {}") {
    ScriptFile script("test -s \"$1\" || exit 9\necho seen wav\n");
    const Backend backend = CommandBackend{script.str(), {"{}"}};
    CHECK(transcribe(backend, clip) == "seen wav");
  }
  SUBCASE("only the first stdout line counts") {
    ScriptFile script("printf 'first line\\nsecond line\\n'\n");
    const Backend backend = CommandBackend{script.str(), {"{}"}};
    CHECK(transcribe(backend, clip) == "first line");
  }
  SUBCASE("nonzero exit fails the clip") {
    ScriptFile script("exit 3\n");
    const Backend backend = CommandBackend{script.str(), {"{}"}};
    CHECK_THROWS_AS((void)transcribe(backend, clip), TranscriptionError);
  }
  SUBCASE("extra fixed arguments are passed through") {
    ScriptFile script("echo \"$1\"\n");
    const Backend backend = CommandBackend{script.str(), {"fixed arg", "{}"}};
    CHECK(transcribe(backend, clip) == "fixed arg");
  }
}

TEST_CASE("http backend posts wav bytes and reads the text field") {
  const AudioClip clip = tiny_clip("web");

  httplib::Server server;
  std::string seen_body, seen_type;
  server.Post("/asr", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    seen_type = req.get_header_value("Content-Type");
    res.set_content("{\"text\": \"  Net RESULT  \"}", "application/json");
  });
  server.Post("/plain", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json at all", "text/plain");
  });
  server.Post("/nofield", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"words\": \"x\"}", "application/json");
  });
  server.Post("/boom", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("internal", "text/plain");
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  CHECK(backend_name(Backend{HttpBackend{}}) == "http");
  CHECK(transcribe(Backend{HttpBackend{base + "/asr", 5}}, clip) == "net result");
  CHECK(seen_body == wav_bytes(clip));  // the request body is the literal RIFF stream
  CHECK(seen_type == "audio/wav");

  CHECK_THROWS_AS((void)transcribe(Backend{HttpBackend{base + "/plain", 5}}, clip),
                  TranscriptionError);
  CHECK_THROWS_AS((void)transcribe(Backend{HttpBackend{base + "/nofield", 5}}, clip),
                  TranscriptionError);
  CHECK_THROWS_AS((void)transcribe(Backend{HttpBackend{base + "/boom", 5}}, clip),
                  TranscriptionError);
  CHECK_THROWS_AS((void)transcribe(Backend{HttpBackend{"https://secure.example/asr", 5}}, clip),
                  TranscriptionError);

  server.stop();
  runner.join();

  // nobody listening anymore: transport failure surfaces after the retry
  CHECK_THROWS_AS((void)transcribe(Backend{HttpBackend{base + "/asr", 1}}, clip),
                  TranscriptionError);
}

TEST_CASE("batch transcription preserves order and captures failures") {
  ScriptedBackend sb;
  sb.table["a"] = "first";
  sb.table["b"] = "second";
  sb.table["d"] = "fourth";
  const Backend backend = sb;
  const std::vector<AudioClip> clips = {tiny_clip("a"), tiny_clip("b"), tiny_clip("c"),
                                        tiny_clip("d")};

  for (int workers : {1, 3}) {
    CAPTURE(workers);
    const std::vector<BatchResult> results = transcribe_batch(backend, clips, workers);
    REQUIRE(results.size() == 4);
    CHECK(results[0].id == "a");
    CHECK(results[0].ok);
    CHECK(results[0].transcript == "first");
    CHECK(results[1].transcript == "second");
    CHECK_FALSE(results[2].ok);
    CHECK(results[2].error.find("c") != std::string::npos);
    CHECK(results[2].transcript.empty());
    CHECK(results[3].ok);
    CHECK(results[3].transcript == "fourth");
  }
}

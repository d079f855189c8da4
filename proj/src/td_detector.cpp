// src/td_detector.cpp
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

#include "tda/td_detector.hpp"

#include <algorithm>
#include <cmath>

#include "tda/errors.hpp"
#include "tda/parallel.hpp"
#include "tda/random.hpp"
#include "tda/text_metrics.hpp"

namespace tda {

const char* td_metric_name(TdMetric m) {
  switch (m) {
    case TdMetric::kWer:
      return "wer";
    case TdMetric::kCer:
      return "cer";
    case TdMetric::kLcp:
      return "lcp";
  }
  return "?";
}

TdMetric td_metric_from_name(const std::string& name) {
  if (name == "wer") return TdMetric::kWer;
  if (name == "cer") return TdMetric::kCer;
  if (name == "lcp") return TdMetric::kLcp;
  throw ConfigError("unknown TD metric: " + name + " (expected wer|cer|lcp)");
}

AudioClip split_prefix(const AudioClip& clip, double k) {
  if (!(k > 0.0 && k < 1.0)) throw ConfigError("split_prefix: k outside (0,1)");
  const auto n = static_cast<std::size_t>(
      std::floor(k * static_cast<double>(clip.samples.size())));
  if (n < 1) throw ClipTooShortError("split_prefix: prefix of " + clip.id + " is empty");
  AudioClip prefix;
  prefix.id = clip.id + "#prefix";
  prefix.sample_rate = clip.sample_rate;
  prefix.samples.assign(clip.samples.begin(), clip.samples.begin() + static_cast<std::ptrdiff_t>(n));
  return prefix;
}

std::string truncate_transcript(const std::string& whole, const std::string& reference,
                                TruncateGranularity granularity) {
  if (granularity == TruncateGranularity::kWord) {
    const std::vector<std::string> ref_words = split_words(reference);
    const std::vector<std::string> whole_words = split_words(whole);
    const std::size_t n = std::min(ref_words.size(), whole_words.size());
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) out.push_back(' ');
      out += whole_words[i];
    }
    return out;
  }
  const std::string ref_n = normalize_text(reference);
  const std::string whole_n = normalize_text(whole);
  const std::size_t n = std::min(ref_n.size(), whole_n.size());
  return normalize_text(whole_n.substr(0, n));
}

namespace {

// Shared empty-string policy: identical emptiness is perfect consistency,
// one-sided emptiness is maximal inconsistency.
double metric_distance(const std::string& s_k, const std::string& s_whole_k, TdMetric m) {
  const bool a_empty = s_k.empty(), b_empty = s_whole_k.empty();
  if (a_empty && b_empty) return 0.0;
  if (a_empty || b_empty) return 1.0;
  switch (m) {
    case TdMetric::kWer:
      return wer(s_k, s_whole_k);
    case TdMetric::kCer:
      return cer(s_k, s_whole_k);
    case TdMetric::kLcp:
      return lcp_distance(s_k, s_whole_k);
  }
  return 0.0;
}

}  // namespace

double TdOutcome::distance(TdMetric m) const {
  switch (m) {
    case TdMetric::kWer:
      return wer_distance;
    case TdMetric::kCer:
      return cer_distance;
    case TdMetric::kLcp:
      return lcp_dist;
  }
  return 0.0;
}

TdOutcome td_score(const Backend& backend, const AudioClip& clip, const TdConfig& cfg) {
  TdOutcome out;
  if (const auto* fixed = std::get_if<double>(&cfg.k)) {
    out.k_used = *fixed;
  } else {
    const RandK& r = std::get<RandK>(cfg.k);
    if (!(r.lo > 0.0 && r.lo < r.hi && r.hi < 1.0)) {
      throw ConfigError("td_score: Rand k bounds must satisfy 0 < lo < hi < 1");
    }
    Rng rng(mix_seed(cfg.seed, clip.id + ":k"));
    out.k_used = rng.uniform(r.lo, r.hi);
  }

  const AudioClip prefix = split_prefix(clip, out.k_used);
  out.prefix_transcript = transcribe(backend, prefix);
  out.whole_transcript = transcribe(backend, clip);

  out.whole_truncated_words =
      truncate_transcript(out.whole_transcript, out.prefix_transcript, TruncateGranularity::kWord);
  out.whole_truncated_chars =
      truncate_transcript(out.whole_transcript, out.prefix_transcript, TruncateGranularity::kChar);

  if (out.prefix_transcript.empty()) {
    // Truncating the whole transcript to an empty prefix erases it, which
    // would hide the mismatch; judge emptiness against the full decode.
    const double d = out.whole_transcript.empty() ? 0.0 : 1.0;
    out.wer_distance = d;
    out.cer_distance = d;
    out.lcp_dist = d;
    return out;
  }
  out.wer_distance = metric_distance(out.prefix_transcript, out.whole_truncated_words, TdMetric::kWer);
  out.cer_distance = metric_distance(out.prefix_transcript, out.whole_truncated_chars, TdMetric::kCer);
  out.lcp_dist = metric_distance(out.prefix_transcript, out.whole_truncated_words, TdMetric::kLcp);
  return out;
}

std::vector<DetectionRecord> detect_batch(const Backend& backend,
                                          const std::vector<DetectionInput>& clips,
                                          const TdConfig& cfg, int workers) {
  std::vector<DetectionRecord> records(clips.size());
  parallel_for(clips.size(), workers, [&](std::size_t i) {
    DetectionRecord& r = records[i];
    r.id = clips[i].clip.id;
    r.label = clips[i].label;
    try {
      r.outcome = td_score(backend, clips[i].clip, cfg);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
  });
  return records;
}

}  // namespace tda

// include/tda/td_detector.hpp
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

#ifndef TDA_TD_DETECTOR_HPP
#define TDA_TD_DETECTOR_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tda/audio.hpp"
#include "tda/backend.hpp"

namespace tda {

// Consistency check: transcribe the first k portion of a clip, transcribe
// the whole clip, truncate the whole-clip transcript to the prefix
// transcript's length, and measure the distance between the two. Benign
// audio transcribes consistently; optimization-attacked audio usually does
// not.

struct RandK {
  double lo = 0.2;
  double hi = 0.8;
};
using KSpec = std::variant<double, RandK>;

enum class TdMetric { kWer, kCer, kLcp };

const char* td_metric_name(TdMetric m);
TdMetric td_metric_from_name(const std::string& name);  // "wer" | "cer" | "lcp"

struct TdConfig {
  KSpec k = 0.5;
  TdMetric metric = TdMetric::kWer;  // headline metric; all three are always computed
  std::uint64_t seed = 0;
};

// First floor(k * N) samples; the prefix clip is named "<id>#prefix" so a
// scripted backend can answer prefix and whole queries differently.
// Throws ClipTooShortError when floor(k * N) < 1.
AudioClip split_prefix(const AudioClip& clip, double k);

enum class TruncateGranularity { kWord, kChar };

// Cuts `whole` down to the length of `reference`: first
// min(words(ref), words(whole)) words, or first min(|ref|, |whole|)
// normalized characters (re-normalized afterwards).
std::string truncate_transcript(const std::string& whole, const std::string& reference,
                                TruncateGranularity granularity);

struct TdOutcome {
  double k_used = 0.0;
  std::string prefix_transcript;        // S_k = g(first k portion)
  std::string whole_transcript;         // g(whole clip)
  std::string whole_truncated_words;    // S_whole,k at word granularity
  std::string whole_truncated_chars;    // S_whole,k at character granularity
  double wer_distance = 0.0;
  double cer_distance = 0.0;
  double lcp_dist = 0.0;

  double distance(TdMetric m) const;
};

// Scores one clip. A Rand k is drawn once per clip from Uniform(lo, hi),
// seeded by (cfg.seed, clip id), so scores are independent of evaluation
// order. Backend failures propagate as exceptions.
TdOutcome td_score(const Backend& backend, const AudioClip& clip, const TdConfig& cfg);

struct DetectionInput {
  AudioClip clip;
  int label = 0;  // 0 benign, 1 adversarial
};

struct DetectionRecord {
  std::string id;
  int label = 0;
  bool ok = false;
  std::string error;  // set when !ok
  TdOutcome outcome;  // valid when ok
};

// One record per input, order preserved; per-clip failures are captured,
// not thrown.
std::vector<DetectionRecord> detect_batch(const Backend& backend,
                                          const std::vector<DetectionInput>& clips,
                                          const TdConfig& cfg, int workers = 1);

}  // namespace tda

#endif  // TDA_TD_DETECTOR_HPP

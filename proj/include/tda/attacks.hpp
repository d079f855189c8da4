// include/tda/attacks.hpp
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

#ifndef TDA_ATTACKS_HPP
#define TDA_ATTACKS_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tda/audio.hpp"
#include "tda/td_detector.hpp"
#include "tda/toy_asr.hpp"
#include "tda/transforms.hpp"

namespace tda {

// Targeted optimization attacks on the toy model:
//   minimize ||delta||^2 + c * ctc_loss(x + delta, target)
// with adaptive-moment updates on delta, an ascending c schedule, and
// amplitude clamping at every step. Success is always judged on the
// materialized 16-bit audio (transformed first when a defense is being
// attacked adaptively), not on the float iterate.

enum class AdaptiveMode { kNone, kQuantize, kDownsample, kSmooth };
enum class AttackVariant { kPlain, kSegment, kConcatSplit, kConcatSilence, kCombination };

struct AttackConfig {
  std::string target;  // any text; normalized and encoded internally

  std::vector<double> c_schedule = {0.1, 1.0, 10.0, 100.0};
  std::size_t iters_per_c = 1000;
  double step_size = 0.01;         // adaptive-moment step in normalized amplitude
  std::size_t refine_iters = 150;  // post-success budget spent shrinking ||delta||

  AdaptiveMode adaptive = AdaptiveMode::kNone;
  int quantize_q = 256;
  int downsample_factor = 2;
  SmoothKind smooth_kind = SmoothKind::kAverage;
  std::size_t smooth_half_width = 2;

  AttackVariant variant = AttackVariant::kPlain;
  double variant_k = 0.5;          // segment / concat split point
  std::vector<KSpec> k_attack;     // combination attack prefix fractions

  std::uint64_t seed = 0;
  bool record_trace = false;       // keep best-objective-so-far per iteration
};

struct AttackResult {
  RealWave delta;          // materialized perturbation at the original rate
  bool success = false;
  std::string achieved;    // decode under the attack's success view
  double db = 0.0;         // dB_x(delta); -inf when delta is all zero
  double c_used = 0.0;
  std::size_t iterations = 0;

  // concat variants: standalone outcome of each part
  bool part1_success = false;
  bool part2_success = false;
  std::string part1_transcript;
  std::string part2_transcript;

  std::vector<double> objective_trace;  // best-so-far; filled when record_trace
};

// variant=plain. adaptive mode selects the objective/success pair:
//   none       — loss at x+delta, success = decode(int16(x+delta)) == target
//   quantize   — loss at quantize(x)+q*u, perturbation constrained to exact
//                multiples of q, success judged after the quantize transform
//   downsample — delta lives on the decimated grid and is brought to full
//                rate through the recovery filter; loss and success go
//                through the downsample transform
//   smooth     — loss through the smoother (average: exact linear adjoint;
//                median: gradient routed to the median index, lowest index
//                on ties); success judged after the smoothing transform
AttackResult opt_attack(const ToyRnn& model, const AudioClip& clip, const AttackConfig& cfg);

// delta forced to zero outside the first floor(variant_k * N) samples;
// success = whole-clip decode equals the target.
AttackResult segment_attack(const ToyRnn& model, const AudioClip& clip, const AttackConfig& cfg);

// Attacks the two halves as independent clips (split: target split at
// ceil(k * words); silence: part 2 targets the empty transcript), then
// joins the adversarial parts. success = decode of the joined clip equals
// the target; per-part outcomes are recorded either way.
AttackResult concat_attack(const ToyRnn& model, const AudioClip& clip, const AttackConfig& cfg);

// Adds one prefix CTC term per k in k_attack:
//   ||delta||^2 + c * (l(x+delta, t) + sum_k l((x+delta)_k, t_k))
// where t_k is the first ceil(k * words(t)) words of t. A RandK entry is
// re-sampled from Uniform(lo, hi) every iteration. success = full decode
// equals t AND every fixed-k prefix decodes to its t_k.
AttackResult combination_attack(const ToyRnn& model, const AudioClip& clip,
                                const AttackConfig& cfg);

// Dispatch on cfg.variant.
AttackResult run_attack(const ToyRnn& model, const AudioClip& clip, const AttackConfig& cfg);

// x + delta, materialized to 16-bit (rounded, clamped), keeping the id.
AudioClip apply_delta(const AudioClip& clip, const RealWave& delta);

}  // namespace tda

#endif  // TDA_ATTACKS_HPP

// include/tda/toy_asr.hpp
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

#ifndef TDA_TOY_ASR_HPP
#define TDA_TOY_ASR_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tda/audio.hpp"
#include "tda/frontend.hpp"

namespace tda {

// ---------------------------------------------------------------------------
// Alphabet: blank (CTC) = 0, 'a'..'j' = 1..10, space = 11.
// ---------------------------------------------------------------------------

inline constexpr int kBlankLabel = 0;
inline constexpr std::size_t kNumLabels = 12;

int label_from_char(char c);   // throws AlphabetError outside {a..j, ' '}
char char_from_label(int label);

// Normalizes first, then maps each character; rejects anything that falls
// outside the model alphabet after normalization.
std::vector<int> encode_text(std::string_view text);
std::string decode_labels(const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Synthetic tone speech: each character is an 80 ms tone at
// 400 + 120 * index(c) Hz (index a=0 .. j=9); space is 80 ms of silence;
// segments get 5 ms raised-cosine ramps; Gaussian noise is added on top.
// ---------------------------------------------------------------------------

struct SynthesisSpec {
  int sample_rate = kDefaultSampleRate;
  double char_seconds = 0.080;
  double ramp_seconds = 0.005;
  double amplitude = 0.3;
  double base_freq_hz = 400.0;
  double freq_step_hz = 120.0;
  double noise_sigma = 0.005;
};

AudioClip synthesize(std::string_view text, std::string id, std::uint64_t seed,
                     const SynthesisSpec& spec = {});

struct LabeledClip {
  AudioClip clip;
  std::string text;
};

struct CorpusConfig {
  std::size_t count = 0;
  int min_words = 3;
  int max_words = 8;
  int min_chars = 2;
  int max_chars = 5;
  std::uint64_t seed = 0;
  std::string id_prefix = "clip";
};

// Random word text over 'a'..'j' per the corpus bounds; the per-clip audio
// seed is derived from (seed, id) so clips are independent of generation
// order.
std::vector<LabeledClip> make_corpus(const CorpusConfig& cfg, const SynthesisSpec& spec = {});

// ---------------------------------------------------------------------------
// Logits container: frames x labels, row-major.
// ---------------------------------------------------------------------------

struct LogitMatrix {
  std::size_t frames = 0;
  std::size_t labels = 0;
  std::vector<double> values;

  double& at(std::size_t f, std::size_t l) { return values[f * labels + l]; }
  double at(std::size_t f, std::size_t l) const { return values[f * labels + l]; }
};

// ---------------------------------------------------------------------------
// CTC
// ---------------------------------------------------------------------------

// Negative log probability of all frame alignments that collapse to target.
// Log-space forward recursion; throws TargetTooLongError when the target
// (with required blanks between repeats) cannot fit the frame count.
double ctc_loss(const LogitMatrix& logits, const std::vector<int>& target);

// Loss plus exact gradient w.r.t. the logits (through the softmax).
double ctc_loss_grad(const LogitMatrix& logits, const std::vector<int>& target, LogitMatrix& grad);

std::vector<int> greedy_path(const LogitMatrix& logits);  // per-frame argmax
// Collapse repeats, drop blanks, map to text (normalized by construction).
std::string greedy_decode(const LogitMatrix& logits);

// ---------------------------------------------------------------------------
// Bidirectional recurrent model: 129 -> 32 per direction (tanh), output
// affine 64 -> 12. All parameters live in one flat vector so the optimizer
// and serialization see a single contiguous block.
// ---------------------------------------------------------------------------

struct RnnDims {
  std::size_t input = 129;
  std::size_t hidden = 32;
  std::size_t outputs = kNumLabels;

  std::size_t param_count() const {
    return 2 * (hidden * input + hidden * hidden + hidden)  // both directions
           + outputs * 2 * hidden + outputs;                // output affine
  }
  bool operator==(const RnnDims&) const = default;
};

class ToyRnn {
 public:
  ToyRnn() : ToyRnn(RnnDims{}) {}
  explicit ToyRnn(RnnDims dims);

  static ToyRnn random_init(RnnDims dims, std::uint64_t seed, double scale);

  const RnnDims& dims() const { return dims_; }
  const StftConfig& frontend() const { return frontend_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Per-bin input standardization applied inside forward/backward:
  // x_norm = (x - shift) / scale. Identity until set; training stores the
  // corpus feature statistics here so they travel with the artifact. Raw
  // log-magnitude bins have a large negative mean that otherwise acts as a
  // random per-unit bias and saturates the recurrences.
  void set_feature_norm(std::vector<double> shift, std::vector<double> scale);
  const std::vector<double>& feature_shift() const { return feat_shift_; }
  const std::vector<double>& feature_scale() const { return feat_scale_; }

  LogitMatrix forward(const FeatureMatrix& features) const;

  // Backpropagates dL/dlogits through the output affine and both
  // recurrences. Returns dL/dfeatures; accumulates (+=) parameter gradients
  // into param_grad when non-null (must be param_count() long).
  FeatureMatrix backward(const FeatureMatrix& features, const LogitMatrix& logit_grad,
                         std::vector<double>* param_grad) const;

  void save(const std::filesystem::path& path) const;
  static ToyRnn load(const std::filesystem::path& path);

 private:
  RnnDims dims_;
  StftConfig frontend_;
  std::vector<double> params_;
  std::vector<double> feat_shift_;  // dims_.input entries
  std::vector<double> feat_scale_;  // dims_.input entries, strictly positive

  FeatureMatrix normalize_features(const FeatureMatrix& features) const;

  friend struct RnnViews;
};

// ---------------------------------------------------------------------------
// End-to-end helpers
// ---------------------------------------------------------------------------

std::string transcribe(const ToyRnn& model, const AudioClip& clip);

// CTC loss of `samples` (real amplitudes) against `target`, with the exact
// gradient w.r.t. every sample: output affine -> both recurrences ->
// log-magnitude -> smoothed magnitude -> windowed DFT -> overlap.
double waveform_loss_grad(const ToyRnn& model, const std::vector<double>& samples,
                          const std::vector<int>& target, std::vector<double>* grad);

// Same pipeline, one pass: loss, sample gradient (when grad != nullptr), and
// the greedy decode of the logits it just computed — callers in the attack
// loop get their success probe without a second forward pass.
struct WaveformEval {
  double loss = 0.0;
  std::string decoded;
};
WaveformEval waveform_eval(const ToyRnn& model, const std::vector<double>& samples,
                           const std::vector<int>& target, std::vector<double>* grad);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double init_scale = 0.05;
  std::uint64_t seed = 0;
  bool verbose = false;  // one line per epoch on stderr
};

// Adaptive-moment mini-batch gradient descent on the CTC loss. Deterministic
// for a fixed (corpus, config); throws TrainingError if the loss goes
// non-finite. epoch_losses, when given, receives the mean per-clip loss of
// each epoch.
ToyRnn train_toy_rnn(const std::vector<LabeledClip>& corpus, const TrainConfig& cfg,
                     std::vector<double>* epoch_losses = nullptr);

}  // namespace tda

#endif  // TDA_TOY_ASR_HPP

// include/tda/transforms.hpp
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

#ifndef TDA_TRANSFORMS_HPP
#define TDA_TRANSFORMS_HPP

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "tda/audio.hpp"
#include "tda/frontend.hpp"

namespace tda {

// All transforms map a clip to a clip of the same length and rate; they are
// deterministic functions of the input samples (and, for the autoencoder,
// of the fitted model).

// Snap every sample to the nearest multiple of q; exact halves round away
// from zero. Result clamped to the int16 range.
AudioClip quantize_clip(const AudioClip& clip, int q);

enum class SmoothKind { kAverage, kMedian };

// Sliding window of width 2*half_width - 1 centered on each sample, edges
// replicated. half_width = 1 is the identity. Average output is rounded to
// the nearest integer; median takes the middle of the sorted window.
AudioClip smooth_clip(const AudioClip& clip, std::size_t half_width, SmoothKind kind);

// Band-limit to a lower effective rate and bring back: low-pass, keep every
// factor-th sample, re-insert zeros, low-pass again with gain `factor`.
// Both filters share one 127-tap windowed-sinc kernel with normalized
// cutoff 0.45 / factor; convolution is delay-compensated so the output
// aligns with (and matches the length of) the input.
AudioClip downsample_clip(const AudioClip& clip, int factor);

// Number of taps / cutoff used by downsample_clip; exposed so an attack that
// models this transform uses the identical kernel.
std::vector<double> downsample_kernel(int factor);
inline constexpr std::size_t kDownsampleTaps = 127;

// Frame-wise PCA autoencoder on log-magnitude spectra. Fitting stacks every
// frame of every corpus clip, computes the mean and the top-`rank`
// eigenvectors of the covariance; applying projects each frame onto that
// basis, re-exponentiates, scales the complex spectrum to the new magnitude
// (phase kept), and resynthesizes by weighted overlap-add.
class PcaAutoencoder {
 public:
  PcaAutoencoder() = default;
  PcaAutoencoder(std::size_t bins, std::size_t rank, std::vector<double> mean,
                 std::vector<double> basis);

  static PcaAutoencoder fit(const std::vector<AudioClip>& corpus, std::size_t rank,
                            const StftConfig& cfg = {});

  AudioClip apply(const AudioClip& clip) const;

  void save(const std::filesystem::path& path) const;
  static PcaAutoencoder load(const std::filesystem::path& path);

  std::size_t bins() const { return bins_; }
  std::size_t rank() const { return rank_; }
  const std::vector<double>& mean() const { return mean_; }
  // Column-major bins x rank; columns are orthonormal.
  const std::vector<double>& basis() const { return basis_; }

 private:
  std::size_t bins_ = 0;
  std::size_t rank_ = 0;
  std::vector<double> mean_;
  std::vector<double> basis_;
  StftConfig cfg_{};
};

struct IdentityTransform {};
struct QuantizeTransform {
  int q = 256;
};
struct SmoothTransform {
  std::size_t half_width = 2;
  SmoothKind kind = SmoothKind::kAverage;
};
struct DownsampleTransform {
  int factor = 2;
};
struct PcaTransform {
  std::shared_ptr<const PcaAutoencoder> model;
};

using Transform = std::variant<IdentityTransform, QuantizeTransform, SmoothTransform,
                               DownsampleTransform, PcaTransform>;

AudioClip apply_transform(const Transform& t, const AudioClip& clip);
std::string transform_name(const Transform& t);

}  // namespace tda

#endif  // TDA_TRANSFORMS_HPP

// include/tda/frontend.hpp
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

#ifndef TDA_FRONTEND_HPP
#define TDA_FRONTEND_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace tda {

struct StftConfig {
  std::size_t frame_length = 256;
  std::size_t hop = 128;
  double mag_epsilon = 1e-9;  // inside the sqrt, keeps |X| differentiable at 0
  double log_epsilon = 1e-9;  // inside the log
  std::size_t bins() const { return frame_length / 2 + 1; }
};

// Number of full frames: floor((n - frame) / hop) + 1. Throws
// InsufficientFramesError when n < frame_length.
std::size_t frame_count(std::size_t num_samples, const StftConfig& cfg);

// Row-major frames x bins.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> values;

  std::complex<double>& at(std::size_t f, std::size_t k) { return values[f * bins + k]; }
  const std::complex<double>& at(std::size_t f, std::size_t k) const { return values[f * bins + k]; }
};

struct FeatureMatrix {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> values;  // row-major frames x bins

  double& at(std::size_t f, std::size_t k) { return values[f * bins + k]; }
  double at(std::size_t f, std::size_t k) const { return values[f * bins + k]; }
};

// Windowed STFT with a periodic Hann window; non-overlapping tail samples
// that do not fill a frame are dropped.
Spectrogram stft(const std::vector<double>& samples, const StftConfig& cfg);

// mag[f,k] = sqrt(re^2 + im^2 + mag_epsilon)
FeatureMatrix magnitudes(const Spectrogram& spec, const StftConfig& cfg);

// feat[f,k] = log(log_epsilon + mag[f,k]); the model input.
FeatureMatrix log_magnitude_features(const std::vector<double>& samples, const StftConfig& cfg);

// Weighted overlap-add inverse. Each frame is inverse-transformed (conjugate
// symmetry fills bins above frame_length/2), weighted by the analysis window
// again, and accumulated; the sum is divided by the accumulated squared
// window. Samples where that denominator is ~0 (the very first/last hop
// edges) and any tail beyond frame coverage are copied from `reference`,
// which also fixes the output length.
std::vector<double> istft_wola(const Spectrogram& spec, const std::vector<double>& reference,
                               const StftConfig& cfg);

// Pulls a gradient w.r.t. the log-magnitude features back to a gradient
// w.r.t. the samples, through log -> magnitude -> DFT -> window -> overlap.
// `samples` must be the exact forward input that produced the features.
std::vector<double> feature_grad_to_samples(const FeatureMatrix& feat_grad,
                                            const std::vector<double>& samples,
                                            const StftConfig& cfg);

}  // namespace tda

#endif  // TDA_FRONTEND_HPP

// src/frontend.cpp
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

#include "tda/frontend.hpp"

#include <cmath>

#include "tda/dsp.hpp"
#include "tda/errors.hpp"

namespace tda {

std::size_t frame_count(std::size_t num_samples, const StftConfig& cfg) {
  if (num_samples < cfg.frame_length) {
    throw InsufficientFramesError("clip shorter than one analysis frame (" +
                                  std::to_string(num_samples) + " < " +
                                  std::to_string(cfg.frame_length) + " samples)");
  }
  return (num_samples - cfg.frame_length) / cfg.hop + 1;
}

Spectrogram stft(const std::vector<double>& samples, const StftConfig& cfg) {
  const std::size_t frames = frame_count(samples.size(), cfg);
  const std::vector<double> window = hann_window(cfg.frame_length);

  Spectrogram spec;
  spec.frames = frames;
  spec.bins = cfg.bins();
  spec.values.resize(frames * spec.bins);

  std::vector<double> buf(cfg.frame_length);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t off = f * cfg.hop;
    for (std::size_t n = 0; n < cfg.frame_length; ++n) buf[n] = samples[off + n] * window[n];
    const std::vector<std::complex<double>> bins = real_spectrum(buf);
    for (std::size_t k = 0; k < spec.bins; ++k) spec.at(f, k) = bins[k];
  }
  return spec;
}

FeatureMatrix magnitudes(const Spectrogram& spec, const StftConfig& cfg) {
  FeatureMatrix mag;
  mag.frames = spec.frames;
  mag.bins = spec.bins;
  mag.values.resize(spec.values.size());
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    const std::complex<double>& v = spec.values[i];
    mag.values[i] = std::sqrt(v.real() * v.real() + v.imag() * v.imag() + cfg.mag_epsilon);
  }
  return mag;
}

FeatureMatrix log_magnitude_features(const std::vector<double>& samples, const StftConfig& cfg) {
  FeatureMatrix feat = magnitudes(stft(samples, cfg), cfg);
  for (double& v : feat.values) v = std::log(cfg.log_epsilon + v);
  return feat;
}

std::vector<double> istft_wola(const Spectrogram& spec, const std::vector<double>& reference,
                               const StftConfig& cfg) {
  const std::size_t n_len = cfg.frame_length;
  if (spec.bins != cfg.bins()) throw SizeMismatchError("istft_wola: bin count mismatch");
  const std::vector<double> window = hann_window(n_len);

  std::vector<double> num(reference.size(), 0.0);
  std::vector<double> den(reference.size(), 0.0);

  std::vector<std::complex<double>> buf(n_len);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const std::size_t off = f * cfg.hop;
    if (off + n_len > reference.size()) throw SizeMismatchError("istft_wola: frames exceed reference length");
    // rebuild the full spectrum via conjugate symmetry, inverse FFT with 1/N
    for (std::size_t k = 0; k < spec.bins; ++k) buf[k] = spec.at(f, k);
    for (std::size_t k = spec.bins; k < n_len; ++k) buf[k] = std::conj(spec.at(f, n_len - k));
    fft_inplace(buf, /*inverse=*/true);
    for (std::size_t n = 0; n < n_len; ++n) {
      const double frame_val = buf[n].real() / static_cast<double>(n_len);
      num[off + n] += window[n] * frame_val;
      den[off + n] += window[n] * window[n];
    }
  }

  std::vector<double> out(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    // den is zero exactly at the first sample (periodic Hann has w[0] = 0)
    // and over any tail the frames never covered; keep the input there.
    out[i] = (den[i] > 1e-12) ? num[i] / den[i] : reference[i];
  }
  return out;
}

std::vector<double> feature_grad_to_samples(const FeatureMatrix& feat_grad,
                                            const std::vector<double>& samples,
                                            const StftConfig& cfg) {
  const Spectrogram spec = stft(samples, cfg);
  if (feat_grad.frames != spec.frames || feat_grad.bins != spec.bins) {
    throw SizeMismatchError("feature_grad_to_samples: feature shape mismatch");
  }
  const std::vector<double> window = hann_window(cfg.frame_length);

  std::vector<double> grad(samples.size(), 0.0);
  std::vector<std::complex<double>> bin_grad(spec.bins);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t k = 0; k < spec.bins; ++k) {
      const std::complex<double>& v = spec.at(f, k);
      const double mag = std::sqrt(v.real() * v.real() + v.imag() * v.imag() + cfg.mag_epsilon);
      // feat = log(eps_l + mag), mag = sqrt(re^2 + im^2 + eps_m)
      const double dmag = feat_grad.at(f, k) / (cfg.log_epsilon + mag);
      bin_grad[k] = {dmag * v.real() / mag, dmag * v.imag() / mag};
    }
    const std::vector<double> frame_grad = real_spectrum_adjoint(bin_grad, cfg.frame_length);
    const std::size_t off = f * cfg.hop;
    for (std::size_t n = 0; n < cfg.frame_length; ++n) {
      grad[off + n] += frame_grad[n] * window[n];
    }
  }
  return grad;
}

}  // namespace tda

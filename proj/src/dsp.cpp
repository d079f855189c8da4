// src/dsp.cpp
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

#include "tda/dsp.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "tda/errors.hpp"

namespace tda {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Twiddle factors for a given size, cached across calls. The FFT runs in
// hot loops (every STFT frame of every gradient step), so recomputing
// sin/cos per call would dominate.
const std::vector<std::complex<double>>& twiddles(std::size_t n, bool inverse) {
  static std::mutex mu;
  static std::unordered_map<std::size_t, std::vector<std::complex<double>>> fwd, inv;
  std::lock_guard<std::mutex> lock(mu);
  auto& table = inverse ? inv : fwd;
  auto it = table.find(n);
  if (it == table.end()) {
    std::vector<std::complex<double>> tw(n / 2);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double ang = sign * kTwoPi * static_cast<double>(k) / static_cast<double>(n);
      tw[k] = {std::cos(ang), std::sin(ang)};
    }
    it = table.emplace(n, std::move(tw)).first;
  }
  return it->second;
}

}  // namespace

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(n) / static_cast<double>(length)));
  }
  return w;
}

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  if (!is_pow2(n)) throw std::invalid_argument("fft_inplace: size must be a power of two");

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const auto& tw = twiddles(n, inverse);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * tw[k * stride];
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> real_spectrum(const std::vector<double>& frame) {
  const std::size_t n = frame.size();
  if (n == 0) throw std::invalid_argument("real_spectrum: empty frame");
  const std::size_t bins = n / 2 + 1;
  std::vector<std::complex<double>> out(bins);

  if (is_pow2(n)) {
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = {frame[i], 0.0};
    fft_inplace(buf, /*inverse=*/false);
    for (std::size_t k = 0; k < bins; ++k) out[k] = buf[k];
    return out;
  }

  // Direct evaluation for non-power-of-two frames; only exercised by small
  // cross-check inputs, never by the production frontend.
  for (std::size_t k = 0; k < bins; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -kTwoPi * static_cast<double>(k) * static_cast<double>(j) / static_cast<double>(n);
      acc += frame[j] * std::complex<double>{std::cos(ang), std::sin(ang)};
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> real_spectrum_adjoint(const std::vector<std::complex<double>>& bin_grad,
                                          std::size_t frame_length) {
  const std::size_t n = frame_length;
  const std::size_t bins = n / 2 + 1;
  if (bin_grad.size() != bins) throw SizeMismatchError("real_spectrum_adjoint: bin count mismatch");
  std::vector<double> grad(n, 0.0);

  if (is_pow2(n)) {
    // g_j = Re( sum_k c_k e^{2 pi i j k / N} ), where c_k = gr_k + i*gi_k for
    // the reported bins and zero elsewhere — the real part of an
    // unnormalized inverse FFT of the zero-padded gradient spectrum.
    std::vector<std::complex<double>> buf(n, {0.0, 0.0});
    for (std::size_t k = 0; k < bins; ++k) buf[k] = bin_grad[k];
    fft_inplace(buf, /*inverse=*/true);
    for (std::size_t j = 0; j < n; ++j) grad[j] = buf[j].real();
    return grad;
  }

  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double ang = kTwoPi * static_cast<double>(k) * static_cast<double>(j) / static_cast<double>(n);
      acc += bin_grad[k].real() * std::cos(ang) - bin_grad[k].imag() * std::sin(ang);
    }
    grad[j] = acc;
  }
  return grad;
}

std::vector<double> lowpass_sinc_hann(std::size_t taps, double cutoff) {
  if (taps % 2 == 0 || taps < 3) throw std::invalid_argument("lowpass_sinc_hann: taps must be odd and >= 3");
  if (!(cutoff > 0.0 && cutoff < 0.5)) throw std::invalid_argument("lowpass_sinc_hann: cutoff outside (0, 0.5)");
  const auto mid = static_cast<double>((taps - 1) / 2);
  std::vector<double> h(taps);
  double sum = 0.0;
  for (std::size_t i = 0; i < taps; ++i) {
    const double t = static_cast<double>(i) - mid;
    const double x = kTwoPi * cutoff * t;
    double sinc = (t == 0.0) ? 2.0 * cutoff : std::sin(x) / (std::numbers::pi * t);
    // symmetric Hann taper (zero at both end taps)
    const double w = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(taps - 1)));
    h[i] = sinc * w;
    sum += h[i];
  }
  for (double& v : h) v /= sum;  // unity DC gain
  return h;
}

std::vector<double> fir_same(const std::vector<double>& x, const std::vector<double>& kernel) {
  const std::size_t n = x.size(), k = kernel.size();
  const std::size_t delay = (k - 1) / 2;
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    // y[i] = sum_m kernel[m] * x[i + delay - m], zero outside [0, n)
    double acc = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + delay) - static_cast<std::ptrdiff_t>(m);
      if (src >= 0 && src < static_cast<std::ptrdiff_t>(n)) acc += kernel[m] * x[static_cast<std::size_t>(src)];
    }
    y[i] = acc;
  }
  return y;
}

std::vector<double> fir_same_adjoint(const std::vector<double>& y, const std::vector<double>& kernel) {
  const std::size_t n = y.size(), k = kernel.size();
  const std::size_t delay = (k - 1) / 2;
  std::vector<double> g(n, 0.0);
  // d y[i] / d x[j] = kernel[i + delay - j]  =>  g[j] = sum_i y[i] * kernel[i + delay - j]
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
      const std::ptrdiff_t i = static_cast<std::ptrdiff_t>(j) + static_cast<std::ptrdiff_t>(m) -
                               static_cast<std::ptrdiff_t>(delay);
      if (i >= 0 && i < static_cast<std::ptrdiff_t>(n)) acc += kernel[m] * y[static_cast<std::size_t>(i)];
    }
    g[j] = acc;
  }
  return g;
}

}  // namespace tda

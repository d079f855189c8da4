// include/tda/dsp.hpp
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

#ifndef TDA_DSP_HPP
#define TDA_DSP_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace tda {

// Periodic Hann window: w[n] = 0.5 * (1 - cos(2*pi*n / N)), n = 0..N-1.
std::vector<double> hann_window(std::size_t length);

// In-place radix-2 FFT. size must be a power of two. inverse=true applies
// the conjugate transform WITHOUT the 1/N normalization (callers scale).
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

// Forward DFT of a real frame, returning the first length/2 + 1 bins.
// Uses the radix-2 FFT when length is a power of two, a direct O(n^2)
// evaluation otherwise (small frames only; used as a cross-check path).
std::vector<std::complex<double>> real_spectrum(const std::vector<double>& frame);

// Adjoint of real_spectrum: maps per-bin gradients (d/d re, d/d im) back to
// per-sample gradients. For X_k = sum_j x_j e^{-2*pi*i*j*k/N} with bins
// k = 0..N/2, the sample gradient is
//   g_j = sum_k Re((gr_k + i*gi_k) * e^{2*pi*i*j*k/N}),
// i.e. the real part of an (unnormalized) inverse FFT of the bin gradients
// zero-padded over the unreported conjugate half.
std::vector<double> real_spectrum_adjoint(const std::vector<std::complex<double>>& bin_grad,
                                          std::size_t frame_length);

// Linear-phase low-pass FIR: windowed sinc (Hann window over taps) with the
// given normalized cutoff (fraction of the sample rate, 0 < cutoff < 0.5).
// taps must be odd so the group delay (taps-1)/2 is an integer.
std::vector<double> lowpass_sinc_hann(std::size_t taps, double cutoff);

// Same-length convolution: output delayed by (taps-1)/2 and trimmed so
// y has x's length; signal treated as zero outside its support.
std::vector<double> fir_same(const std::vector<double>& x, const std::vector<double>& kernel);

// Adjoint of fir_same as a linear map in x: correlation with the kernel,
// same trimming. Satisfies <fir_same(x), y> == <x, fir_same_adjoint(y)>.
std::vector<double> fir_same_adjoint(const std::vector<double>& y, const std::vector<double>& kernel);

}  // namespace tda

#endif  // TDA_DSP_HPP

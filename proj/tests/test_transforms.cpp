// tests/test_transforms.cpp
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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <vector>

#include "tda/errors.hpp"
#include "tda/frontend.hpp"
#include "tda/random.hpp"
#include "tda/toy_asr.hpp"
#include "tda/transforms.hpp"

using namespace tda;

namespace {

constexpr double kPi = std::numbers::pi;

AudioClip random_clip(Rng& rng, std::size_t n, const std::string& id) {
  AudioClip clip;
  clip.id = id;
  clip.samples.resize(n);
  for (auto& s : clip.samples) s = static_cast<std::int16_t>(rng.uniform_int(-32768, 32767));
  return clip;
}

AudioClip tone_clip(double freq_hz, std::size_t n, double amplitude, const std::string& id) {
  AudioClip clip;
  clip.id = id;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = amplitude * std::sin(2.0 * kPi * freq_hz * static_cast<double>(i) / 16000.0);
    clip.samples[i] = static_cast<std::int16_t>(std::lround(v * 32767.0));
  }
  return clip;
}

double relative_rms_error(const AudioClip& got, const AudioClip& want) {
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < want.samples.size(); ++i) {
    const double d = static_cast<double>(got.samples[i]) - static_cast<double>(want.samples[i]);
    err += d * d;
    ref += static_cast<double>(want.samples[i]) * static_cast<double>(want.samples[i]);
  }
  return std::sqrt(err / ref);
}

// Independent oracle for the quantizer: long-double rounding half away from
// zero on the real line, then clamping.
std::int16_t quantize_oracle(std::int16_t v, int q) {
  const double scaled = static_cast<double>(v) / q;
  const double rounded = scaled >= 0.0 ? std::floor(scaled + 0.5) : std::ceil(scaled - 0.5);
  const double out = rounded * q;
  return static_cast<std::int16_t>(std::clamp(out, -32768.0, 32767.0));
}

// ---------------------------------------------------------------------------
// Hand-rolled cyclic Jacobi eigensolver: the independent oracle for the
// principal-component fit. Returns eigenvalues in descending order.
// ---------------------------------------------------------------------------
std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n) {
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (off < 1e-22) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

// Mean and covariance of the log-magnitude frames of a corpus, computed with
// plain loops (no shared code with the fit).
void frame_stats(const std::vector<AudioClip>& corpus, const StftConfig& cfg,
                 std::vector<double>& mean, std::vector<double>& cov) {
  const std::size_t bins = cfg.bins();
  std::vector<std::vector<double>> frames;
  for (const AudioClip& clip : corpus) {
    const FeatureMatrix f = log_magnitude_features(to_real(clip).values, cfg);
    for (std::size_t t = 0; t < f.frames; ++t) {
      std::vector<double> row(bins);
      for (std::size_t k = 0; k < bins; ++k) row[k] = f.at(t, k);
      frames.push_back(std::move(row));
    }
  }
  mean.assign(bins, 0.0);
  for (const auto& row : frames) {
    for (std::size_t k = 0; k < bins; ++k) mean[k] += row[k];
  }
  for (double& m : mean) m /= static_cast<double>(frames.size());
  cov.assign(bins * bins, 0.0);
  for (const auto& row : frames) {
    for (std::size_t i = 0; i < bins; ++i) {
      for (std::size_t j = 0; j < bins; ++j) {
        cov[i * bins + j] += (row[i] - mean[i]) * (row[j] - mean[j]);
      }
    }
  }
  for (double& c : cov) c /= static_cast<double>(frames.size());
}

}  // namespace

TEST_CASE("quantize matches the rounding oracle on every int16 value") {
  for (int q : {2, 7, 256, 1024}) {
    AudioClip clip;
    clip.id = "all";
    clip.samples.resize(65536);
    for (int i = 0; i < 65536; ++i) {
      clip.samples[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(i - 32768);
    }
    const AudioClip out = quantize_clip(clip, q);
    for (int i = 0; i < 65536; ++i) {
      const auto v = static_cast<std::int16_t>(i - 32768);
      CAPTURE(q);
      CAPTURE(v);
      REQUIRE(out.samples[static_cast<std::size_t>(i)] == quantize_oracle(v, q));
    }
  }
}

TEST_CASE("quantize is idempotent and stays within half a step") {
  Rng rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const AudioClip clip = random_clip(rng, 400, "q");
    const int q = 1 << rng.uniform_int(1, 10);
    const AudioClip once = quantize_clip(clip, q);
    const AudioClip twice = quantize_clip(once, q);
    CAPTURE(trial);
    REQUIRE(once.samples == twice.samples);
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
      const int err = std::abs(static_cast<int>(once.samples[i]) - clip.samples[i]);
      // clamping at the int16 rim may add 1 on top of the q/2 bound
      REQUIRE(err <= q / 2 + 1);
    }
  }
}

TEST_CASE("quantize commutes with shifts by whole steps") {
  // T(x + m*q) == T(x) + m*q away from the clamp rim: the identity the
  // quantize-aware attack leans on
  Rng rng(101);
  const int q = 256;
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = static_cast<std::int16_t>(rng.uniform_int(-20000, 20000));
    const int m = rng.uniform_int(-40, 40);
    const auto shifted = static_cast<std::int16_t>(x + m * q);
    AudioClip a;
    a.id = "a";
    a.samples = {x, shifted};
    const AudioClip out = quantize_clip(a, q);
    CHECK(out.samples[1] == static_cast<std::int16_t>(out.samples[0] + m * q));
  }
}

TEST_CASE("smoothing with half width 1 is the identity") {
  Rng rng(102);
  const AudioClip clip = random_clip(rng, 300, "s");
  CHECK(smooth_clip(clip, 1, SmoothKind::kAverage).samples == clip.samples);
  CHECK(smooth_clip(clip, 1, SmoothKind::kMedian).samples == clip.samples);
}

TEST_CASE("average smoothing hand case with edge replication") {
  AudioClip clip;
  clip.id = "avg";
  clip.samples = {0, 10, 20, 30, 40};
  const AudioClip out = smooth_clip(clip, 2, SmoothKind::kAverage);  // window 3
  // edges replicate the boundary sample
  CHECK(out.samples[0] == 3);   // (0 + 0 + 10) / 3 = 3.33 -> 3
  CHECK(out.samples[1] == 10);  // (0 + 10 + 20) / 3
  CHECK(out.samples[2] == 20);
  CHECK(out.samples[3] == 30);
  CHECK(out.samples[4] == 37);  // (30 + 40 + 40) / 3 = 36.67 -> 37
}

TEST_CASE("median smoothing equals the sort oracle") {
  Rng rng(103);
  for (std::size_t half_width : {2u, 3u, 5u}) {
    const AudioClip clip = random_clip(rng, 200, "m");
    const AudioClip out = smooth_clip(clip, half_width, SmoothKind::kMedian);
    const auto radius = static_cast<std::ptrdiff_t>(half_width) - 1;
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
      std::vector<std::int16_t> window;
      for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
        const auto j = std::clamp<std::ptrdiff_t>(
            static_cast<std::ptrdiff_t>(i) + d, 0,
            static_cast<std::ptrdiff_t>(clip.samples.size()) - 1);
        window.push_back(clip.samples[static_cast<std::size_t>(j)]);
      }
      std::sort(window.begin(), window.end());
      CAPTURE(half_width);
      CAPTURE(i);
      REQUIRE(out.samples[i] == window[window.size() / 2]);
    }
  }
}

TEST_CASE("median smoothing flattens isolated spikes, average only dilutes them") {
  AudioClip clip;
  clip.id = "spike";
  clip.samples.assign(64, 1000);
  clip.samples[32] = 30000;
  const AudioClip med = smooth_clip(clip, 2, SmoothKind::kMedian);
  CHECK(med.samples[32] == 1000);
  const AudioClip avg = smooth_clip(clip, 2, SmoothKind::kAverage);
  CHECK(avg.samples[32] > 1000);
  CHECK(avg.samples[32] < 30000);
}

TEST_CASE("downsample keeps an in-band tone and kills an out-of-band tone") {
  // factor 2 at 16 kHz: recovery low-pass cuts at 0.225 * 16 kHz = 3.6 kHz
  const AudioClip in_band = tone_clip(1000.0, 16000, 0.5, "low");
  const AudioClip out1 = downsample_clip(in_band, 2);
  REQUIRE(out1.samples.size() == in_band.samples.size());
  REQUIRE(out1.sample_rate == in_band.sample_rate);
  CHECK(relative_rms_error(out1, in_band) < 0.05);

  const AudioClip out_band = tone_clip(7000.0, 16000, 0.5, "high");
  const AudioClip out2 = downsample_clip(out_band, 2);
  double residual = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < out_band.samples.size(); ++i) {
    residual += static_cast<double>(out2.samples[i]) * out2.samples[i];
    ref += static_cast<double>(out_band.samples[i]) * out_band.samples[i];
  }
  CHECK(residual / ref < 0.05);
}

TEST_CASE("downsample rejects factors below 2") {
  Rng rng(104);
  const AudioClip clip = random_clip(rng, 64, "d");
  CHECK_THROWS_AS((void)downsample_clip(clip, 1), ConfigError);
  CHECK_THROWS_AS((void)downsample_clip(clip, 0), ConfigError);
}

TEST_CASE("principal-component fit matches the Jacobi oracle") {
  // structured corpus: tone mixes give the frame covariance a clear spectrum
  const SynthesisSpec spec;
  std::vector<AudioClip> corpus;
  corpus.push_back(synthesize("abc de fgh", "p1", 1, spec));
  corpus.push_back(synthesize("ij ab cd", "p2", 2, spec));
  corpus.push_back(synthesize("fee dad", "p3", 3, spec));

  const StftConfig cfg;
  const std::size_t bins = cfg.bins();
  const std::size_t rank = 8;
  const PcaAutoencoder ae = PcaAutoencoder::fit(corpus, rank, cfg);
  REQUIRE(ae.bins() == bins);
  REQUIRE(ae.rank() == rank);
  const std::vector<double>& basis = ae.basis();  // column-major bins x rank

  std::vector<double> mean, cov;
  frame_stats(corpus, cfg, mean, cov);

  // mean agrees with the plain-loop oracle
  for (std::size_t k = 0; k < bins; ++k) {
    REQUIRE(ae.mean()[k] == doctest::Approx(mean[k]).epsilon(1e-9));
  }

  // columns are orthonormal
  for (std::size_t r = 0; r < rank; ++r) {
    for (std::size_t s = r; s < rank; ++s) {
      double d = 0.0;
      for (std::size_t k = 0; k < bins; ++k) d += basis[r * bins + k] * basis[s * bins + k];
      CHECK(d == doctest::Approx(r == s ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
    }
  }

  // each column is an eigenvector of the sample covariance:
  // || C b - (b' C b) b || small relative to ||C b||
  double captured = 0.0;
  for (std::size_t r = 0; r < rank; ++r) {
    std::vector<double> cb(bins, 0.0);
    for (std::size_t i = 0; i < bins; ++i) {
      for (std::size_t j = 0; j < bins; ++j) {
        cb[i] += cov[i * bins + j] * basis[r * bins + j];
      }
    }
    double lambda = 0.0, cb_norm = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
      lambda += basis[r * bins + i] * cb[i];
      cb_norm += cb[i] * cb[i];
    }
    double resid = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
      const double d = cb[i] - lambda * basis[r * bins + i];
      resid += d * d;
    }
    CAPTURE(r);
    CHECK(std::sqrt(resid / cb_norm) < 1e-7);
    captured += lambda;
  }

  // and together they capture the top-rank variance found by the oracle
  const std::vector<double> eig = jacobi_eigenvalues(cov, bins);
  double top = 0.0;
  for (std::size_t r = 0; r < rank; ++r) top += eig[r];
  CHECK(captured == doctest::Approx(top).epsilon(1e-8));
}

TEST_CASE("full-rank autoencoder is the identity up to rounding") {
  const AudioClip clip = synthesize("ab cd", "full", 4, SynthesisSpec{});
  const StftConfig cfg;
  const PcaAutoencoder ae = PcaAutoencoder::fit({clip}, cfg.bins(), cfg);
  const AudioClip out = ae.apply(clip);
  REQUIRE(out.samples.size() == clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    CHECK(std::abs(out.samples[i] - clip.samples[i]) <= 1);
  }
}

TEST_CASE("low-rank autoencoder actually reforms the audio") {
  const AudioClip clip = synthesize("abc de", "low", 5, SynthesisSpec{});
  const PcaAutoencoder ae = PcaAutoencoder::fit({clip}, 4, StftConfig{});
  const AudioClip out = ae.apply(clip);
  REQUIRE(out.samples.size() == clip.samples.size());
  REQUIRE(out.sample_rate == clip.sample_rate);
  CHECK(out.samples != clip.samples);
}

TEST_CASE("autoencoder artifact round-trips exactly") {
  const AudioClip clip = synthesize("fee da", "rt", 6, SynthesisSpec{});
  const PcaAutoencoder ae = PcaAutoencoder::fit({clip}, 8, StftConfig{});
  const auto path = std::filesystem::temp_directory_path() / "tda-test-pca.bin";
  ae.save(path);
  const PcaAutoencoder back = PcaAutoencoder::load(path);
  CHECK(back.bins() == ae.bins());
  CHECK(back.rank() == ae.rank());
  CHECK(back.mean() == ae.mean());    // bit-exact
  CHECK(back.basis() == ae.basis());  // bit-exact
  CHECK(back.apply(clip).samples == ae.apply(clip).samples);
  std::filesystem::remove(path);
}

TEST_CASE("every transform preserves length and sample rate") {
  Rng rng(105);
  const AudioClip clip = random_clip(rng, 2048, "inv");
  const AudioClip fit_src = synthesize("ab cd ef", "fit", 7, SynthesisSpec{});
  auto ae = std::make_shared<const PcaAutoencoder>(PcaAutoencoder::fit({fit_src}, 8, StftConfig{}));
  const std::vector<Transform> transforms{
      IdentityTransform{},
      QuantizeTransform{256},
      SmoothTransform{2, SmoothKind::kAverage},
      SmoothTransform{2, SmoothKind::kMedian},
      DownsampleTransform{2},
      PcaTransform{ae},
  };
  for (const Transform& t : transforms) {
    const AudioClip out = apply_transform(t, clip);
    CAPTURE(transform_name(t));
    CHECK(out.samples.size() == clip.samples.size());
    CHECK(out.sample_rate == clip.sample_rate);
  }
}

TEST_CASE("transform names encode their parameters") {
  CHECK(transform_name(IdentityTransform{}) == "identity");
  CHECK(transform_name(QuantizeTransform{512}) == "quantize-512");
  CHECK(transform_name(SmoothTransform{2, SmoothKind::kAverage}) == "smooth-avg-2");
  CHECK(transform_name(SmoothTransform{3, SmoothKind::kMedian}) == "smooth-med-3");
  CHECK(transform_name(DownsampleTransform{2}) == "downsample-2");
}

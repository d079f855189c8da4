// src/transforms.cpp
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

#include "tda/transforms.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "tda/binio.hpp"
#include "tda/dsp.hpp"
#include "tda/errors.hpp"

namespace tda {

AudioClip quantize_clip(const AudioClip& clip, int q) {
  if (q < 1) throw ConfigError("quantize: q must be >= 1");
  AudioClip out = clip;
  const std::int64_t q64 = q;
  for (std::int16_t& s : out.samples) {
    const std::int64_t v = s;
    const std::int64_t a = std::abs(v);
    // nearest multiple, halves away from zero: m = floor((2|v| + q) / (2q))
    std::int64_t snapped = ((2 * a + q64) / (2 * q64)) * q64;
    if (v < 0) snapped = -snapped;
    snapped = std::clamp<std::int64_t>(snapped, -32768, 32767);
    s = static_cast<std::int16_t>(snapped);
  }
  return out;
}

AudioClip smooth_clip(const AudioClip& clip, std::size_t half_width, SmoothKind kind) {
  if (half_width < 1) throw ConfigError("smooth: half_width must be >= 1");
  if (half_width == 1) return clip;  // window of one sample
  const std::size_t n = clip.samples.size();
  const auto radius = static_cast<std::ptrdiff_t>(half_width - 1);
  const std::size_t width = 2 * half_width - 1;

  AudioClip out = clip;
  std::vector<std::int16_t> window(width);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
      std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + d;
      j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(n) - 1);  // edge replication
      window[static_cast<std::size_t>(d + radius)] = clip.samples[static_cast<std::size_t>(j)];
    }
    if (kind == SmoothKind::kAverage) {
      std::int64_t sum = 0;
      for (std::int16_t v : window) sum += v;
      out.samples[i] = static_cast<std::int16_t>(
          std::llround(static_cast<double>(sum) / static_cast<double>(width)));
    } else {
      std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(width / 2),
                       window.end());
      out.samples[i] = window[width / 2];
    }
  }
  return out;
}

std::vector<double> downsample_kernel(int factor) {
  if (factor < 2) throw ConfigError("downsample: factor must be >= 2");
  return lowpass_sinc_hann(kDownsampleTaps, 0.45 / static_cast<double>(factor));
}

AudioClip downsample_clip(const AudioClip& clip, int factor) {
  const std::vector<double> kernel = downsample_kernel(factor);
  const RealWave wave = to_real(clip);
  const std::size_t n = wave.values.size();
  const auto f = static_cast<std::size_t>(factor);

  const std::vector<double> filtered = fir_same(wave.values, kernel);

  std::vector<double> decimated;
  decimated.reserve(n / f + 1);
  for (std::size_t i = 0; i < n; i += f) decimated.push_back(filtered[i]);

  std::vector<double> stuffed(decimated.size() * f, 0.0);
  for (std::size_t i = 0; i < decimated.size(); ++i) stuffed[i * f] = decimated[i];

  std::vector<double> restored = fir_same(stuffed, kernel);
  restored.resize(n);
  // zero-stuffing divides the band energy by `factor`; compensate
  for (double& v : restored) v *= static_cast<double>(factor);

  RealWave out_wave{std::move(restored), clip.sample_rate};
  return to_clip(out_wave, clip.id);
}

PcaAutoencoder::PcaAutoencoder(std::size_t bins, std::size_t rank, std::vector<double> mean,
                               std::vector<double> basis)
    : bins_(bins), rank_(rank), mean_(std::move(mean)), basis_(std::move(basis)) {
  if (mean_.size() != bins_ || basis_.size() != bins_ * rank_) {
    throw ConfigError("PcaAutoencoder: inconsistent dimensions");
  }
}

PcaAutoencoder PcaAutoencoder::fit(const std::vector<AudioClip>& corpus, std::size_t rank,
                                   const StftConfig& cfg) {
  const std::size_t bins = cfg.bins();
  if (rank < 1 || rank > bins) throw ConfigError("PcaAutoencoder: rank outside [1, bins]");
  if (corpus.empty()) throw ConfigError("PcaAutoencoder: empty fitting corpus");

  std::size_t total_frames = 0;
  std::vector<FeatureMatrix> feats;
  feats.reserve(corpus.size());
  for (const AudioClip& clip : corpus) {
    feats.push_back(log_magnitude_features(to_real(clip).values, cfg));
    total_frames += feats.back().frames;
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bins));
  for (const FeatureMatrix& fm : feats) {
    for (std::size_t f = 0; f < fm.frames; ++f) {
      for (std::size_t k = 0; k < bins; ++k) mean(static_cast<Eigen::Index>(k)) += fm.at(f, k);
    }
  }
  mean /= static_cast<double>(total_frames);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(bins),
                                              static_cast<Eigen::Index>(bins));
  Eigen::VectorXd row(static_cast<Eigen::Index>(bins));
  for (const FeatureMatrix& fm : feats) {
    for (std::size_t f = 0; f < fm.frames; ++f) {
      for (std::size_t k = 0; k < bins; ++k) row(static_cast<Eigen::Index>(k)) = fm.at(f, k);
      row -= mean;
      cov.selfadjointView<Eigen::Lower>().rankUpdate(row);
    }
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(total_frames);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw TrainingError("PcaAutoencoder: eigendecomposition failed");

  // eigenvalues come back ascending; the top-rank basis is the last columns
  std::vector<double> mean_out(bins), basis(bins * rank);
  for (std::size_t k = 0; k < bins; ++k) mean_out[k] = mean(static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < rank; ++r) {
    const Eigen::Index col = static_cast<Eigen::Index>(bins - 1 - r);
    for (std::size_t k = 0; k < bins; ++k) {
      basis[r * bins + k] = solver.eigenvectors()(static_cast<Eigen::Index>(k), col);
    }
  }

  PcaAutoencoder model(bins, rank, std::move(mean_out), std::move(basis));
  model.cfg_ = cfg;
  return model;
}

AudioClip PcaAutoencoder::apply(const AudioClip& clip) const {
  const StftConfig& cfg = cfg_;
  if (bins_ != cfg.bins()) throw ConfigError("PcaAutoencoder: model bins do not match analysis config");
  const RealWave wave = to_real(clip);
  Spectrogram spec = stft(wave.values, cfg);
  const FeatureMatrix mag = magnitudes(spec, cfg);

  std::vector<double> centered(bins_), coeff(rank_), reformed(bins_);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t k = 0; k < bins_; ++k) {
      centered[k] = std::log(cfg.log_epsilon + mag.at(f, k)) - mean_[k];
    }
    for (std::size_t r = 0; r < rank_; ++r) {
      double acc = 0.0;
      const double* col = &basis_[r * bins_];
      for (std::size_t k = 0; k < bins_; ++k) acc += col[k] * centered[k];
      coeff[r] = acc;
    }
    for (std::size_t k = 0; k < bins_; ++k) reformed[k] = mean_[k];
    for (std::size_t r = 0; r < rank_; ++r) {
      const double* col = &basis_[r * bins_];
      for (std::size_t k = 0; k < bins_; ++k) reformed[k] += coeff[r] * col[k];
    }
    for (std::size_t k = 0; k < bins_; ++k) {
      // back from log domain; keep the original phase by scaling the
      // complex bin to the reconstructed magnitude
      const double new_mag = std::max(0.0, std::exp(reformed[k]) - cfg.log_epsilon);
      const double scale = new_mag / mag.at(f, k);
      spec.at(f, k) *= scale;
    }
  }

  const std::vector<double> resynth = istft_wola(spec, wave.values, cfg);
  RealWave out{resynth, clip.sample_rate};
  return to_clip(out, clip.id);
}

namespace {
constexpr char kPcaMagic[8] = {'T', 'D', 'A', 'P', 'C', 'A', '1', '\n'};
}  // namespace

void PcaAutoencoder::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(kPcaMagic, 8);
  binio::write_u64(f, bins_);
  binio::write_u64(f, rank_);
  binio::write_u64(f, cfg_.frame_length);
  binio::write_u64(f, cfg_.hop);
  binio::write_double(f, cfg_.mag_epsilon);
  binio::write_double(f, cfg_.log_epsilon);
  binio::write_doubles(f, mean_);
  binio::write_doubles(f, basis_);
  if (!f) throw IoError("short write: " + path.string());
}

PcaAutoencoder PcaAutoencoder::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path.string());
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kPcaMagic, 8) != 0) {
    throw ModelFormatError("not a PCA model file: " + path.string());
  }
  const std::uint64_t bins = binio::read_u64(f);
  const std::uint64_t rank = binio::read_u64(f);
  StftConfig cfg;
  cfg.frame_length = binio::read_u64(f);
  cfg.hop = binio::read_u64(f);
  cfg.mag_epsilon = binio::read_double(f);
  cfg.log_epsilon = binio::read_double(f);
  std::vector<double> mean(bins), basis(bins * rank);
  binio::read_doubles(f, mean);
  binio::read_doubles(f, basis);
  if (!f) throw ModelFormatError("truncated PCA model file: " + path.string());
  PcaAutoencoder model(bins, rank, std::move(mean), std::move(basis));
  model.cfg_ = cfg;
  return model;
}

AudioClip apply_transform(const Transform& t, const AudioClip& clip) {
  return std::visit(
      [&](const auto& v) -> AudioClip {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, IdentityTransform>) {
          return clip;
        } else if constexpr (std::is_same_v<T, QuantizeTransform>) {
          return quantize_clip(clip, v.q);
        } else if constexpr (std::is_same_v<T, SmoothTransform>) {
          return smooth_clip(clip, v.half_width, v.kind);
        } else if constexpr (std::is_same_v<T, DownsampleTransform>) {
          return downsample_clip(clip, v.factor);
        } else {
          if (!v.model) throw ConfigError("autoencoder transform without a fitted model");
          return v.model->apply(clip);
        }
      },
      t);
}

std::string transform_name(const Transform& t) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, IdentityTransform>) {
          return "identity";
        } else if constexpr (std::is_same_v<T, QuantizeTransform>) {
          return "quantize-" + std::to_string(v.q);
        } else if constexpr (std::is_same_v<T, SmoothTransform>) {
          return std::string(v.kind == SmoothKind::kAverage ? "smooth-avg-" : "smooth-med-") +
                 std::to_string(v.half_width);
        } else if constexpr (std::is_same_v<T, DownsampleTransform>) {
          return "downsample-" + std::to_string(v.factor);
        } else {
          return "autoencoder-" + std::to_string(v.model ? v.model->rank() : 0);
        }
      },
      t);
}

}  // namespace tda

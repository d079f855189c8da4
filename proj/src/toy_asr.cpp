// src/toy_asr.cpp
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

#include "tda/toy_asr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>

#include "tda/binio.hpp"
#include "tda/errors.hpp"
#include "tda/random.hpp"
#include "tda/text_metrics.hpp"

namespace tda {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Alphabet
// ---------------------------------------------------------------------------

int label_from_char(char c) {
  if (c >= 'a' && c <= 'j') return 1 + (c - 'a');
  if (c == ' ') return 11;
  throw AlphabetError(std::string("character outside model alphabet: '") + c + "'");
}

char char_from_label(int label) {
  if (label >= 1 && label <= 10) return static_cast<char>('a' + (label - 1));
  if (label == 11) return ' ';
  throw AlphabetError("label " + std::to_string(label) + " has no character");
}

std::vector<int> encode_text(std::string_view text) {
  const std::string norm = normalize_text(text);
  std::vector<int> labels;
  labels.reserve(norm.size());
  for (char c : norm) labels.push_back(label_from_char(c));
  return labels;
}

std::string decode_labels(const std::vector<int>& labels) {
  std::string out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(char_from_label(l));
  return out;
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

AudioClip synthesize(std::string_view text, std::string id, std::uint64_t seed,
                     const SynthesisSpec& spec) {
  const std::string norm = normalize_text(text);
  if (norm.empty()) throw AlphabetError("synthesize: empty text");
  for (char c : norm) label_from_char(c);  // validate before allocating

  const auto seg_len = static_cast<std::size_t>(std::lround(spec.char_seconds * spec.sample_rate));
  const auto ramp = static_cast<std::size_t>(std::lround(spec.ramp_seconds * spec.sample_rate));

  RealWave wave;
  wave.sample_rate = spec.sample_rate;
  wave.values.assign(norm.size() * seg_len, 0.0);

  for (std::size_t ci = 0; ci < norm.size(); ++ci) {
    const char c = norm[ci];
    if (c == ' ') continue;  // silence segment
    const double freq = spec.base_freq_hz + spec.freq_step_hz * static_cast<double>(c - 'a');
    const std::size_t off = ci * seg_len;
    for (std::size_t n = 0; n < seg_len; ++n) {
      double env = 1.0;
      if (n < ramp) {
        env *= 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(n) / static_cast<double>(ramp)));
      }
      if (n >= seg_len - ramp) {
        const auto from_end = static_cast<double>(seg_len - 1 - n);
        env *= 0.5 * (1.0 - std::cos(std::numbers::pi * from_end / static_cast<double>(ramp)));
      }
      const double t = static_cast<double>(n) / spec.sample_rate;
      wave.values[off + n] = spec.amplitude * env * std::sin(2.0 * std::numbers::pi * freq * t);
    }
  }

  Rng rng(seed);
  for (double& v : wave.values) v += rng.gaussian(0.0, spec.noise_sigma);

  return to_clip(wave, std::move(id));
}

std::vector<LabeledClip> make_corpus(const CorpusConfig& cfg, const SynthesisSpec& spec) {
  std::vector<LabeledClip> corpus;
  corpus.reserve(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "%04zu", i);
    const std::string id = cfg.id_prefix + "-" + suffix;

    Rng text_rng(mix_seed(cfg.seed, id + ":text"));
    const int words = static_cast<int>(text_rng.uniform_int(cfg.min_words, cfg.max_words));
    std::string text;
    for (int w = 0; w < words; ++w) {
      if (w > 0) text.push_back(' ');
      const int chars = static_cast<int>(text_rng.uniform_int(cfg.min_chars, cfg.max_chars));
      for (int c = 0; c < chars; ++c) {
        text.push_back(static_cast<char>('a' + text_rng.uniform_int(0, 9)));
      }
    }

    AudioClip clip = synthesize(text, id, mix_seed(cfg.seed, id + ":audio"), spec);
    corpus.push_back(LabeledClip{std::move(clip), std::move(text)});
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// CTC
// ---------------------------------------------------------------------------

namespace {

double lse2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double lse3(double a, double b, double c) { return lse2(lse2(a, b), c); }

// blank-interleaved target: [-, t0, -, t1, ..., -]; size 2L+1
std::vector<int> extend_target(const std::vector<int>& target) {
  std::vector<int> ext(2 * target.size() + 1, kBlankLabel);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

void check_feasible(const LogitMatrix& logits, const std::vector<int>& target) {
  // any width works as long as label 0 (blank) plus one real label exist
  if (logits.labels < 2 || logits.frames == 0) {
    throw SizeMismatchError("ctc: degenerate logit matrix " + std::to_string(logits.frames) +
                            "x" + std::to_string(logits.labels));
  }
  for (int l : target) {
    if (l <= 0 || l >= static_cast<int>(logits.labels)) {
      throw AlphabetError("ctc: target label out of range: " + std::to_string(l));
    }
  }
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++repeats;
  }
  // every label needs a frame; repeated labels need a separating blank frame
  if (logits.frames < target.size() + repeats) {
    throw TargetTooLongError("ctc: target of " + std::to_string(target.size()) +
                             " labels cannot fit " + std::to_string(logits.frames) + " frames");
  }
}

// row-wise log-softmax
LogitMatrix log_probs_of(const LogitMatrix& logits) {
  LogitMatrix lp = logits;
  for (std::size_t t = 0; t < lp.frames; ++t) {
    double m = kNegInf;
    for (std::size_t k = 0; k < lp.labels; ++k) m = std::max(m, lp.at(t, k));
    double sum = 0.0;
    for (std::size_t k = 0; k < lp.labels; ++k) sum += std::exp(lp.at(t, k) - m);
    const double lz = m + std::log(sum);
    for (std::size_t k = 0; k < lp.labels; ++k) lp.at(t, k) -= lz;
  }
  return lp;
}

// Forward lattice over the extended target; alpha[t*S + s] includes the
// frame-t emission. Returns the log of the total path probability.
double ctc_alpha(const LogitMatrix& lp, const std::vector<int>& ext, std::vector<double>& alpha) {
  const std::size_t T = lp.frames, S = ext.size();
  alpha.assign(T * S, kNegInf);
  alpha[0] = lp.at(0, static_cast<std::size_t>(ext[0]));
  if (S > 1) alpha[1] = lp.at(0, static_cast<std::size_t>(ext[1]));
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = alpha[(t - 1) * S + s];
      if (s >= 1) acc = lse2(acc, alpha[(t - 1) * S + s - 1]);
      // skip transition allowed between distinct non-blank labels
      if (s >= 2 && ext[s] != kBlankLabel && ext[s] != ext[s - 2]) {
        acc = lse2(acc, alpha[(t - 1) * S + s - 2]);
      }
      alpha[t * S + s] = (acc == kNegInf) ? kNegInf
                                          : acc + lp.at(t, static_cast<std::size_t>(ext[s]));
    }
  }
  double log_p = alpha[(T - 1) * S + S - 1];
  if (S > 1) log_p = lse2(log_p, alpha[(T - 1) * S + S - 2]);
  return log_p;
}

void ctc_beta(const LogitMatrix& lp, const std::vector<int>& ext, std::vector<double>& beta) {
  const std::size_t T = lp.frames, S = ext.size();
  beta.assign(T * S, kNegInf);
  beta[(T - 1) * S + S - 1] = lp.at(T - 1, static_cast<std::size_t>(ext[S - 1]));
  if (S > 1) beta[(T - 1) * S + S - 2] = lp.at(T - 1, static_cast<std::size_t>(ext[S - 2]));
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = beta[(t + 1) * S + s];
      if (s + 1 < S) acc = lse2(acc, beta[(t + 1) * S + s + 1]);
      if (s + 2 < S && ext[s + 2] != kBlankLabel && ext[s + 2] != ext[s]) {
        acc = lse2(acc, beta[(t + 1) * S + s + 2]);
      }
      beta[t * S + s] = (acc == kNegInf) ? kNegInf
                                         : acc + lp.at(t, static_cast<std::size_t>(ext[s]));
    }
  }
}

}  // namespace

double ctc_loss(const LogitMatrix& logits, const std::vector<int>& target) {
  check_feasible(logits, target);
  const LogitMatrix lp = log_probs_of(logits);
  const std::vector<int> ext = extend_target(target);
  std::vector<double> alpha;
  return -ctc_alpha(lp, ext, alpha);
}

double ctc_loss_grad(const LogitMatrix& logits, const std::vector<int>& target, LogitMatrix& grad) {
  check_feasible(logits, target);
  const LogitMatrix lp = log_probs_of(logits);
  const std::vector<int> ext = extend_target(target);
  const std::size_t T = lp.frames, S = ext.size();

  std::vector<double> alpha, beta;
  const double log_p = ctc_alpha(lp, ext, alpha);
  ctc_beta(lp, ext, beta);

  grad.frames = T;
  grad.labels = lp.labels;
  grad.values.assign(T * lp.labels, 0.0);

  std::vector<double> posterior(lp.labels);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(posterior.begin(), posterior.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      const double a = alpha[t * S + s], b = beta[t * S + s];
      if (a == kNegInf || b == kNegInf) continue;
      // alpha and beta both include this frame's emission; divide one out
      const auto k = static_cast<std::size_t>(ext[s]);
      posterior[k] += std::exp(a + b - lp.at(t, k) - log_p);
    }
    // d(-log P)/d logit = softmax - state posterior
    for (std::size_t k = 0; k < lp.labels; ++k) {
      grad.at(t, k) = std::exp(lp.at(t, k)) - posterior[k];
    }
  }
  return -log_p;
}

std::vector<int> greedy_path(const LogitMatrix& logits) {
  std::vector<int> path(logits.frames);
  for (std::size_t t = 0; t < logits.frames; ++t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.labels; ++k) {
      if (logits.at(t, k) > logits.at(t, best)) best = k;
    }
    path[t] = static_cast<int>(best);
  }
  return path;
}

std::string greedy_decode(const LogitMatrix& logits) {
  const std::vector<int> path = greedy_path(logits);
  std::string raw;
  int prev = kBlankLabel;
  for (int l : path) {
    if (l != prev && l != kBlankLabel) raw.push_back(char_from_label(l));
    prev = l;
  }
  return normalize_text(raw);
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

// Offsets into the flat parameter vector.
struct RnnViews {
  double* wx_f;
  double* wh_f;
  double* b_f;
  double* wx_b;
  double* wh_b;
  double* b_b;
  double* wo;
  double* bo;

  RnnViews(const RnnDims& d, double* p) {
    const std::size_t i = d.input, h = d.hidden, o = d.outputs;
    wx_f = p;
    wh_f = wx_f + h * i;
    b_f = wh_f + h * h;
    wx_b = b_f + h;
    wh_b = wx_b + h * i;
    b_b = wh_b + h * h;
    wo = b_b + h;
    bo = wo + o * 2 * h;
  }
};

ToyRnn::ToyRnn(RnnDims dims)
    : dims_(dims),
      params_(dims.param_count(), 0.0),
      feat_shift_(dims.input, 0.0),
      feat_scale_(dims.input, 1.0) {}

void ToyRnn::set_feature_norm(std::vector<double> shift, std::vector<double> scale) {
  if (shift.size() != dims_.input || scale.size() != dims_.input) {
    throw SizeMismatchError("feature norm: expected " + std::to_string(dims_.input) +
                            " entries, got " + std::to_string(shift.size()) + "/" +
                            std::to_string(scale.size()));
  }
  for (double s : scale) {
    if (!(s > 0.0)) throw ConfigError("feature norm: scale entries must be positive");
  }
  feat_shift_ = std::move(shift);
  feat_scale_ = std::move(scale);
}

FeatureMatrix ToyRnn::normalize_features(const FeatureMatrix& features) const {
  FeatureMatrix out = features;
  const std::size_t I = dims_.input;
  for (std::size_t t = 0; t < out.frames; ++t) {
    for (std::size_t i = 0; i < I; ++i) {
      out.values[t * I + i] = (out.values[t * I + i] - feat_shift_[i]) / feat_scale_[i];
    }
  }
  return out;
}

ToyRnn ToyRnn::random_init(RnnDims dims, std::uint64_t seed, double scale) {
  ToyRnn model(dims);
  Rng rng(seed);
  for (double& p : model.params_) p = rng.uniform(-scale, scale);
  return model;
}

namespace {

// y += W x, W is rows x cols row-major
void gemv_acc(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] += acc;
  }
}

// y += W^T x  (x has `rows` entries, y has `cols`)
void gemv_t_acc(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w + r * cols;
    const double xr = x[r];
    for (std::size_t c = 0; c < cols; ++c) y[c] += wr[c] * xr;
  }
}

// W += a * x^T (outer product accumulate)
void outer_acc(double* w, std::size_t rows, std::size_t cols, const double* a, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* wr = w + r * cols;
    const double ar = a[r];
    for (std::size_t c = 0; c < cols; ++c) wr[c] += ar * x[c];
  }
}

// Runs both recurrences, filling hf/hb (T x H each).
void run_recurrences(const RnnDims& d, const RnnViews& v, const FeatureMatrix& x,
                     std::vector<double>& hf, std::vector<double>& hb) {
  const std::size_t T = x.frames, H = d.hidden, I = d.input;
  hf.assign(T * H, 0.0);
  hb.assign(T * H, 0.0);
  std::vector<double> act(H);

  for (std::size_t t = 0; t < T; ++t) {
    std::copy(v.b_f, v.b_f + H, act.begin());
    gemv_acc(v.wx_f, H, I, &x.values[t * I], act.data());
    if (t > 0) gemv_acc(v.wh_f, H, H, &hf[(t - 1) * H], act.data());
    for (std::size_t h = 0; h < H; ++h) hf[t * H + h] = std::tanh(act[h]);
  }
  for (std::size_t t = T; t-- > 0;) {
    std::copy(v.b_b, v.b_b + H, act.begin());
    gemv_acc(v.wx_b, H, I, &x.values[t * I], act.data());
    if (t + 1 < T) gemv_acc(v.wh_b, H, H, &hb[(t + 1) * H], act.data());
    for (std::size_t h = 0; h < H; ++h) hb[t * H + h] = std::tanh(act[h]);
  }
}

}  // namespace

LogitMatrix ToyRnn::forward(const FeatureMatrix& features) const {
  if (features.bins != dims_.input) {
    throw SizeMismatchError("forward: feature width " + std::to_string(features.bins) +
                            " != model input " + std::to_string(dims_.input));
  }
  const std::size_t T = features.frames, H = dims_.hidden, O = dims_.outputs;
  const RnnViews v(dims_, const_cast<double*>(params_.data()));

  const FeatureMatrix xn = normalize_features(features);
  std::vector<double> hf, hb;
  run_recurrences(dims_, v, xn, hf, hb);

  LogitMatrix logits;
  logits.frames = T;
  logits.labels = O;
  logits.values.assign(T * O, 0.0);
  std::vector<double> hcat(2 * H);
  for (std::size_t t = 0; t < T; ++t) {
    std::copy(&hf[t * H], &hf[t * H] + H, hcat.begin());
    std::copy(&hb[t * H], &hb[t * H] + H, hcat.begin() + static_cast<std::ptrdiff_t>(H));
    for (std::size_t o = 0; o < O; ++o) logits.at(t, o) = v.bo[o];
    gemv_acc(v.wo, O, 2 * H, hcat.data(), &logits.values[t * O]);
  }
  return logits;
}

FeatureMatrix ToyRnn::backward(const FeatureMatrix& features, const LogitMatrix& logit_grad,
                               std::vector<double>* param_grad) const {
  const std::size_t T = features.frames, H = dims_.hidden, I = dims_.input, O = dims_.outputs;
  if (logit_grad.frames != T || logit_grad.labels != O) {
    throw SizeMismatchError("backward: logit gradient shape mismatch");
  }
  if (param_grad && param_grad->size() != params_.size()) {
    throw SizeMismatchError("backward: parameter gradient size mismatch");
  }
  const RnnViews v(dims_, const_cast<double*>(params_.data()));
  std::optional<RnnViews> g;
  if (param_grad) g.emplace(dims_, param_grad->data());

  const FeatureMatrix xn = normalize_features(features);
  std::vector<double> hf, hb;
  run_recurrences(dims_, v, xn, hf, hb);

  // Split the output-layer gradient into per-direction hidden gradients.
  std::vector<double> dhf(T * H, 0.0), dhb(T * H, 0.0);
  std::vector<double> hcat(2 * H), dhcat(2 * H);
  for (std::size_t t = 0; t < T; ++t) {
    const double* gt = &logit_grad.values[t * O];
    std::fill(dhcat.begin(), dhcat.end(), 0.0);
    gemv_t_acc(v.wo, O, 2 * H, gt, dhcat.data());
    std::copy(dhcat.begin(), dhcat.begin() + static_cast<std::ptrdiff_t>(H), &dhf[t * H]);
    std::copy(dhcat.begin() + static_cast<std::ptrdiff_t>(H), dhcat.end(), &dhb[t * H]);
    if (param_grad) {
      std::copy(&hf[t * H], &hf[t * H] + H, hcat.begin());
      std::copy(&hb[t * H], &hb[t * H] + H, hcat.begin() + static_cast<std::ptrdiff_t>(H));
      outer_acc(g->wo, O, 2 * H, gt, hcat.data());
      for (std::size_t o = 0; o < O; ++o) g->bo[o] += gt[o];
    }
  }

  FeatureMatrix dx;
  dx.frames = T;
  dx.bins = I;
  dx.values.assign(T * I, 0.0);

  // forward direction: dependencies flow left->right, so gradients right->left
  std::vector<double> da(H), carry(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    for (std::size_t h = 0; h < H; ++h) {
      const double dh = dhf[t * H + h] + carry[h];
      const double y = hf[t * H + h];
      da[h] = dh * (1.0 - y * y);
    }
    if (param_grad) {
      outer_acc(g->wx_f, H, I, da.data(), &xn.values[t * I]);
      if (t > 0) outer_acc(g->wh_f, H, H, da.data(), &hf[(t - 1) * H]);
      for (std::size_t h = 0; h < H; ++h) g->b_f[h] += da[h];
    }
    gemv_t_acc(v.wx_f, H, I, da.data(), &dx.values[t * I]);
    std::fill(carry.begin(), carry.end(), 0.0);
    gemv_t_acc(v.wh_f, H, H, da.data(), carry.data());
  }

  // backward direction: dependencies flow right->left, gradients left->right
  std::fill(carry.begin(), carry.end(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t h = 0; h < H; ++h) {
      const double dh = dhb[t * H + h] + carry[h];
      const double y = hb[t * H + h];
      da[h] = dh * (1.0 - y * y);
    }
    if (param_grad) {
      outer_acc(g->wx_b, H, I, da.data(), &xn.values[t * I]);
      if (t + 1 < T) outer_acc(g->wh_b, H, H, da.data(), &hb[(t + 1) * H]);
      for (std::size_t h = 0; h < H; ++h) g->b_b[h] += da[h];
    }
    gemv_t_acc(v.wx_b, H, I, da.data(), &dx.values[t * I]);
    std::fill(carry.begin(), carry.end(), 0.0);
    gemv_t_acc(v.wh_b, H, H, da.data(), carry.data());
  }

  // dx so far is w.r.t. the normalized inputs; bring it back to raw features
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < I; ++i) dx.values[t * I + i] /= feat_scale_[i];
  }
  return dx;
}

namespace {
constexpr char kRnnMagic[8] = {'T', 'D', 'A', 'R', 'N', 'N', '1', '\n'};
}

void ToyRnn::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(kRnnMagic, 8);
  binio::write_u64(f, dims_.input);
  binio::write_u64(f, dims_.hidden);
  binio::write_u64(f, dims_.outputs);
  binio::write_u64(f, frontend_.frame_length);
  binio::write_u64(f, frontend_.hop);
  binio::write_double(f, frontend_.mag_epsilon);
  binio::write_double(f, frontend_.log_epsilon);
  binio::write_doubles(f, feat_shift_);
  binio::write_doubles(f, feat_scale_);
  binio::write_doubles(f, params_);
  if (!f) throw IoError("short write: " + path.string());
}

ToyRnn ToyRnn::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path.string());
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kRnnMagic, 8) != 0) {
    throw ModelFormatError("not a model file: " + path.string());
  }
  RnnDims dims;
  dims.input = binio::read_u64(f);
  dims.hidden = binio::read_u64(f);
  dims.outputs = binio::read_u64(f);
  ToyRnn model(dims);
  model.frontend_.frame_length = binio::read_u64(f);
  model.frontend_.hop = binio::read_u64(f);
  model.frontend_.mag_epsilon = binio::read_double(f);
  model.frontend_.log_epsilon = binio::read_double(f);
  binio::read_doubles(f, model.feat_shift_);
  binio::read_doubles(f, model.feat_scale_);
  binio::read_doubles(f, model.params_);
  if (!f) throw ModelFormatError("truncated model file: " + path.string());
  return model;
}

// ---------------------------------------------------------------------------
// End-to-end helpers
// ---------------------------------------------------------------------------

std::string transcribe(const ToyRnn& model, const AudioClip& clip) {
  const FeatureMatrix feat = log_magnitude_features(to_real(clip).values, model.frontend());
  return greedy_decode(model.forward(feat));
}

WaveformEval waveform_eval(const ToyRnn& model, const std::vector<double>& samples,
                           const std::vector<int>& target, std::vector<double>* grad) {
  const StftConfig& cfg = model.frontend();
  const FeatureMatrix feat = log_magnitude_features(samples, cfg);
  const LogitMatrix logits = model.forward(feat);

  WaveformEval out;
  out.decoded = greedy_decode(logits);
  if (!grad) {
    out.loss = ctc_loss(logits, target);
    return out;
  }
  LogitMatrix lgrad;
  out.loss = ctc_loss_grad(logits, target, lgrad);
  const FeatureMatrix fgrad = model.backward(feat, lgrad, nullptr);
  *grad = feature_grad_to_samples(fgrad, samples, cfg);
  return out;
}

double waveform_loss_grad(const ToyRnn& model, const std::vector<double>& samples,
                          const std::vector<int>& target, std::vector<double>* grad) {
  return waveform_eval(model, samples, target, grad).loss;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

ToyRnn train_toy_rnn(const std::vector<LabeledClip>& corpus, const TrainConfig& cfg,
                     std::vector<double>* epoch_losses) {
  if (corpus.empty()) throw TrainingError("train: empty corpus");

  ToyRnn model = ToyRnn::random_init(RnnDims{}, mix_seed(cfg.seed, "init"), cfg.init_scale);
  const StftConfig& fe = model.frontend();

  // Features and targets are fixed across epochs; extract once.
  std::vector<FeatureMatrix> feats;
  std::vector<std::vector<int>> targets;
  feats.reserve(corpus.size());
  targets.reserve(corpus.size());
  for (const LabeledClip& lc : corpus) {
    feats.push_back(log_magnitude_features(to_real(lc.clip).values, fe));
    targets.push_back(encode_text(lc.text));
  }

  // Per-bin corpus statistics; stored on the model so inference normalizes
  // identically. A floor keeps near-constant bins from exploding the scale.
  {
    const std::size_t I = model.dims().input;
    std::vector<double> mean(I, 0.0), var(I, 0.0);
    std::size_t total_frames = 0;
    for (const FeatureMatrix& f : feats) {
      for (std::size_t t = 0; t < f.frames; ++t) {
        for (std::size_t i = 0; i < I; ++i) mean[i] += f.values[t * I + i];
      }
      total_frames += f.frames;
    }
    if (total_frames == 0) throw TrainingError("train: corpus has no frames");
    for (double& m_i : mean) m_i /= static_cast<double>(total_frames);
    for (const FeatureMatrix& f : feats) {
      for (std::size_t t = 0; t < f.frames; ++t) {
        for (std::size_t i = 0; i < I; ++i) {
          const double d = f.values[t * I + i] - mean[i];
          var[i] += d * d;
        }
      }
    }
    std::vector<double> scale(I);
    for (std::size_t i = 0; i < I; ++i) {
      scale[i] = std::max(std::sqrt(var[i] / static_cast<double>(total_frames)), 1e-3);
    }
    model.set_feature_norm(std::move(mean), std::move(scale));
  }

  const std::size_t n_params = model.params().size();
  std::vector<double> grad(n_params), m(n_params, 0.0), v(n_params, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  std::size_t step = 0;

  Rng shuffle_rng(mix_seed(cfg.seed, "shuffle"));
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with our own generator: shuffle order is part of the
    // determinism contract, so std::shuffle's unspecified algorithm is out.
    for (std::size_t i = order.size(); i-- > 1;) {
      const auto j = static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t idx = order[b];
        const LogitMatrix logits = model.forward(feats[idx]);
        LogitMatrix lgrad;
        const double loss = ctc_loss_grad(logits, targets[idx], lgrad);
        if (!std::isfinite(loss)) {
          throw TrainingError("train: non-finite loss on clip " + corpus[idx].clip.id);
        }
        epoch_loss += loss;
        model.backward(feats[idx], lgrad, &grad);
      }
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      std::vector<double>& p = model.params();
      for (std::size_t i = 0; i < n_params; ++i) {
        const double gi = grad[i] * inv_batch;
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
        p[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + adam_eps);
      }
    }

    epoch_loss /= static_cast<double>(corpus.size());
    if (!std::isfinite(epoch_loss)) throw TrainingError("train: non-finite epoch loss");
    if (epoch_losses) epoch_losses->push_back(epoch_loss);
    if (cfg.verbose) {
      std::fprintf(stderr, "epoch %zu/%zu  mean ctc loss %.4f\n", epoch + 1, cfg.epochs, epoch_loss);
    }
  }
  return model;
}

}  // namespace tda

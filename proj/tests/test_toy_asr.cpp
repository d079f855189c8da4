// tests/test_toy_asr.cpp
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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tda/errors.hpp"
#include "tda/frontend.hpp"
#include "tda/random.hpp"
#include "tda/text_metrics.hpp"
#include "tda/toy_asr.hpp"

using namespace tda;

namespace {

// Independent oracle: sum the probability of every length-T label path whose
// collapse (merge repeats, then drop blanks) equals the target. Exponential
// in T; fine for T <= 6.
void collapse_path(const std::vector<int>& path, std::vector<int>& out) {
  out.clear();
  int prev = -1;
  for (int lab : path) {
    if (lab != prev && lab != kBlankLabel) out.push_back(lab);
    prev = lab;
  }
}

double enum_ctc_prob(const LogitMatrix& logits, const std::vector<int>& target) {
  const std::size_t T = logits.frames, A = logits.labels;
  // per-frame softmax probabilities
  std::vector<double> probs(T * A);
  for (std::size_t t = 0; t < T; ++t) {
    double mx = logits.at(t, 0);
    for (std::size_t a = 1; a < A; ++a) mx = std::max(mx, logits.at(t, a));
    double z = 0.0;
    for (std::size_t a = 0; a < A; ++a) z += std::exp(logits.at(t, a) - mx);
    for (std::size_t a = 0; a < A; ++a) probs[t * A + a] = std::exp(logits.at(t, a) - mx) / z;
  }

  std::vector<int> path(T, 0), collapsed;
  double total = 0.0;
  while (true) {
    double p = 1.0;
    for (std::size_t t = 0; t < T; ++t) p *= probs[t * A + static_cast<std::size_t>(path[t])];
    collapse_path(path, collapsed);
    if (collapsed == target) total += p;
    // odometer over the A^T paths
    std::size_t pos = 0;
    while (pos < T && ++path[pos] == static_cast<int>(A)) {
      path[pos] = 0;
      ++pos;
    }
    if (pos == T) break;
  }
  return total;
}

LogitMatrix random_logits(Rng& rng, std::size_t frames, std::size_t labels) {
  LogitMatrix m;
  m.frames = frames;
  m.labels = labels;
  m.values.resize(frames * labels);
  for (double& v : m.values) v = rng.uniform(-2.0, 2.0);
  return m;
}

FeatureMatrix random_features(Rng& rng, std::size_t frames, std::size_t bins) {
  FeatureMatrix m;
  m.frames = frames;
  m.bins = bins;
  m.values.resize(frames * bins);
  for (double& v : m.values) v = rng.uniform(-1.0, 1.0);
  return m;
}

std::size_t required_frames(const std::vector<int>& target) {
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++repeats;
  }
  return target.size() + repeats;
}

}  // namespace

TEST_CASE("alphabet mapping") {
  CHECK(label_from_char('a') == 1);
  CHECK(label_from_char('j') == 10);
  CHECK(label_from_char(' ') == 11);
  CHECK(char_from_label(1) == 'a');
  CHECK(char_from_label(11) == ' ');
  CHECK_THROWS_AS((void)label_from_char('z'), AlphabetError);
  CHECK_THROWS_AS((void)label_from_char('0'), AlphabetError);

  CHECK(encode_text("ab c") == std::vector<int>{1, 2, 11, 3});
  CHECK(encode_text("AB  c!") == std::vector<int>{1, 2, 11, 3});  // normalized first
  CHECK(decode_labels({1, 2, 11, 3}) == "ab c");
  CHECK_THROWS_AS((void)encode_text("xyz"), AlphabetError);
}

TEST_CASE("ctc loss hand case: two uniform frames, one-label target") {
  // all-zero logits over {blank, a} make every frame 50/50; the paths
  // (a,-), (-,a), (a,a) collapse to "a", so P = 3/4
  LogitMatrix logits;
  logits.frames = 2;
  logits.labels = 2;
  logits.values.assign(4, 0.0);
  const double loss = ctc_loss(logits, {1});
  CHECK(loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("ctc loss equals path enumeration on 500 random small cases") {
  Rng rng(2001);
  int feasible_cases = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t T = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const std::size_t A = static_cast<std::size_t>(rng.uniform_int(2, 3));
    const LogitMatrix logits = random_logits(rng, T, A);
    std::vector<int> target(static_cast<std::size_t>(rng.uniform_int(0, 3)));
    for (int& lab : target) lab = static_cast<int>(rng.uniform_int(1, static_cast<int>(A) - 1));

    const double oracle_prob = enum_ctc_prob(logits, target);
    CAPTURE(trial);
    if (required_frames(target) > T) {
      // infeasible target: no path exists, and the implementation says so
      REQUIRE(oracle_prob == 0.0);
      CHECK_THROWS_AS((void)ctc_loss(logits, target), TargetTooLongError);
      continue;
    }
    ++feasible_cases;
    const double loss = ctc_loss(logits, target);
    REQUIRE(std::abs(loss - (-std::log(oracle_prob))) < 1e-10);
  }
  CHECK(feasible_cases > 300);  // the sweep mostly exercises real losses
}

TEST_CASE("ctc rejects out-of-range labels") {
  Rng rng(2002);
  const LogitMatrix logits = random_logits(rng, 4, 3);
  CHECK_THROWS((void)ctc_loss(logits, {0}));   // blank cannot be a target label
  CHECK_THROWS((void)ctc_loss(logits, {3}));   // beyond the label count
  CHECK_THROWS((void)ctc_loss(logits, {-1}));
}

TEST_CASE("ctc gradient matches central finite differences") {
  Rng rng(2003);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t T = static_cast<std::size_t>(rng.uniform_int(3, 6));
    const std::size_t A = 3;
    LogitMatrix logits = random_logits(rng, T, A);
    std::vector<int> target{1, 2};

    LogitMatrix grad;
    const double loss = ctc_loss_grad(logits, target, grad);
    CHECK(loss == doctest::Approx(ctc_loss(logits, target)).epsilon(1e-12));
    REQUIRE(grad.frames == T);
    REQUIRE(grad.labels == A);

    const double eps = 1e-6;
    for (std::size_t i = 0; i < T * A; ++i) {
      const double keep = logits.values[i];
      logits.values[i] = keep + eps;
      const double up = ctc_loss(logits, target);
      logits.values[i] = keep - eps;
      const double down = ctc_loss(logits, target);
      logits.values[i] = keep;
      const double fd = (up - down) / (2.0 * eps);
      CAPTURE(trial);
      CAPTURE(i);
      REQUIRE(std::abs(grad.values[i] - fd) <
              1e-4 * std::max({std::abs(fd), std::abs(grad.values[i]), 1e-3}));
    }
    // softmax minus a distribution: rows sum to zero
    for (std::size_t t = 0; t < T; ++t) {
      double row = 0.0;
      for (std::size_t a = 0; a < A; ++a) row += grad.at(t, a);
      CHECK(std::abs(row) < 1e-12);
    }
  }
}

TEST_CASE("greedy decode collapses repeats and drops blanks") {
  LogitMatrix logits;
  logits.frames = 7;
  logits.labels = kNumLabels;
  logits.values.assign(7 * kNumLabels, 0.0);
  const int seq[7] = {0, 1, 1, 0, 2, 2, 0};  // -, a, a, -, b, b, -
  for (std::size_t t = 0; t < 7; ++t) logits.at(t, seq[t]) = 5.0;
  CHECK(greedy_path(logits) == std::vector<int>(seq, seq + 7));
  CHECK(greedy_decode(logits) == "ab");

  // repeated letter needs a separating blank
  LogitMatrix rep;
  rep.frames = 3;
  rep.labels = kNumLabels;
  rep.values.assign(3 * kNumLabels, 0.0);
  rep.at(0, 1) = 5.0;
  rep.at(1, 0) = 5.0;
  rep.at(2, 1) = 5.0;
  CHECK(greedy_decode(rep) == "aa");
}

TEST_CASE("bidirectional forward matches a straight-line reimplementation") {
  const RnnDims dims{4, 3, 5};
  const ToyRnn model = ToyRnn::random_init(dims, 99, 0.5);
  Rng rng(2004);
  const std::size_t T = 6;
  const FeatureMatrix x = random_features(rng, T, dims.input);
  const LogitMatrix got = model.forward(x);
  REQUIRE(got.frames == T);
  REQUIRE(got.labels == dims.outputs);

  // independent pass with plain loops over the documented flat layout:
  // wx_f, wh_f, b_f, wx_b, wh_b, b_b, wo, bo (all row-major)
  const std::vector<double>& p = model.params();
  const std::size_t I = dims.input, H = dims.hidden, O = dims.outputs;
  const double* wx_f = p.data();
  const double* wh_f = wx_f + H * I;
  const double* b_f = wh_f + H * H;
  const double* wx_b = b_f + H;
  const double* wh_b = wx_b + H * I;
  const double* b_b = wh_b + H * H;
  const double* wo = b_b + H;
  const double* bo = wo + O * 2 * H;

  std::vector<double> hf(T * H, 0.0), hb(T * H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t h = 0; h < H; ++h) {
      double a = b_f[h];
      for (std::size_t i = 0; i < I; ++i) a += wx_f[h * I + i] * x.at(t, i);
      if (t > 0) {
        for (std::size_t g = 0; g < H; ++g) a += wh_f[h * H + g] * hf[(t - 1) * H + g];
      }
      hf[t * H + h] = std::tanh(a);
    }
  }
  for (std::size_t ti = T; ti-- > 0;) {
    for (std::size_t h = 0; h < H; ++h) {
      double a = b_b[h];
      for (std::size_t i = 0; i < I; ++i) a += wx_b[h * I + i] * x.at(ti, i);
      if (ti + 1 < T) {
        for (std::size_t g = 0; g < H; ++g) a += wh_b[h * H + g] * hb[(ti + 1) * H + g];
      }
      hb[ti * H + h] = std::tanh(a);
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t o = 0; o < O; ++o) {
      double v = bo[o];
      for (std::size_t h = 0; h < H; ++h) v += wo[o * 2 * H + h] * hf[t * H + h];
      for (std::size_t h = 0; h < H; ++h) v += wo[o * 2 * H + H + h] * hb[t * H + h];
      CAPTURE(t);
      CAPTURE(o);
      REQUIRE(got.at(t, o) == doctest::Approx(v).epsilon(1e-12));
    }
  }
}

TEST_CASE("backward matches finite differences for features and parameters") {
  const RnnDims dims{4, 3, 5};
  ToyRnn model = ToyRnn::random_init(dims, 77, 0.5);
  Rng rng(2005);
  SUBCASE("identity feature norm") {}
  SUBCASE("standardized features") {
    std::vector<double> shift(dims.input), scale(dims.input);
    for (double& s : shift) s = rng.uniform(-2.0, 2.0);
    for (double& s : scale) s = rng.uniform(0.5, 3.0);
    model.set_feature_norm(shift, scale);
  }
  const std::size_t T = 5;
  const FeatureMatrix x = random_features(rng, T, dims.input);

  // linear functional of the logits: L = sum c .* forward(x), so the
  // logit gradient is exactly c
  LogitMatrix c = random_logits(rng, T, dims.outputs);
  auto loss_of = [&](const FeatureMatrix& feats) {
    const LogitMatrix y = model.forward(feats);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.values.size(); ++i) acc += c.values[i] * y.values[i];
    return acc;
  };

  std::vector<double> param_grad(model.params().size(), 0.0);
  const FeatureMatrix dx = model.backward(x, c, &param_grad);
  REQUIRE(dx.frames == T);
  REQUIRE(dx.bins == dims.input);

  const double eps = 1e-6;
  FeatureMatrix xp = x;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double keep = xp.values[i];
    xp.values[i] = keep + eps;
    const double up = loss_of(xp);
    xp.values[i] = keep - eps;
    const double down = loss_of(xp);
    xp.values[i] = keep;
    const double fd = (up - down) / (2.0 * eps);
    CAPTURE(i);
    REQUIRE(std::abs(dx.values[i] - fd) < 1e-5 * std::max({std::abs(fd), 1.0}));
  }
  for (std::size_t j = 0; j < model.params().size(); ++j) {
    const double keep = model.params()[j];
    model.params()[j] = keep + eps;
    const double up = loss_of(x);
    model.params()[j] = keep - eps;
    const double down = loss_of(x);
    model.params()[j] = keep;
    const double fd = (up - down) / (2.0 * eps);
    CAPTURE(j);
    REQUIRE(std::abs(param_grad[j] - fd) < 1e-5 * std::max({std::abs(fd), 1.0}));
  }
}

TEST_CASE("feature normalization equals manual standardization") {
  const RnnDims dims{6, 3, 4};
  const ToyRnn plain = ToyRnn::random_init(dims, 303, 0.4);
  ToyRnn normed = plain;
  Rng rng(2007);
  std::vector<double> shift(dims.input), scale(dims.input);
  for (double& s : shift) s = rng.uniform(-3.0, 3.0);
  for (double& s : scale) s = rng.uniform(0.5, 4.0);
  normed.set_feature_norm(shift, scale);

  const FeatureMatrix x = random_features(rng, 7, dims.input);
  FeatureMatrix xn = x;
  for (std::size_t t = 0; t < xn.frames; ++t) {
    for (std::size_t i = 0; i < xn.bins; ++i) {
      xn.values[t * xn.bins + i] = (xn.values[t * xn.bins + i] - shift[i]) / scale[i];
    }
  }
  const LogitMatrix a = normed.forward(x);
  const LogitMatrix b = plain.forward(xn);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
  }

  CHECK_THROWS_AS(normed.set_feature_norm({1.0}, {1.0}), SizeMismatchError);
  CHECK_THROWS_AS(
      normed.set_feature_norm(std::vector<double>(dims.input, 0.0),
                              std::vector<double>(dims.input, 0.0)),
      ConfigError);
}

TEST_CASE("waveform gradient matches finite differences end to end") {
  ToyRnn model = ToyRnn::random_init(RnnDims{}, 55, 0.05);
  // a non-trivial input norm, as every trained artifact carries one
  model.set_feature_norm(std::vector<double>(model.dims().input, -3.0),
                         std::vector<double>(model.dims().input, 2.0));
  const AudioClip clip = synthesize("ab", "wg", 44, SynthesisSpec{});
  std::vector<double> samples = to_real(clip).values;
  const std::vector<int> target = encode_text("ab");

  std::vector<double> grad;
  const double base = waveform_loss_grad(model, samples, target, &grad);
  REQUIRE(grad.size() == samples.size());
  CHECK(std::isfinite(base));

  const WaveformEval we = waveform_eval(model, samples, target, nullptr);
  CHECK(we.loss == doctest::Approx(base).epsilon(1e-12));
  CHECK(we.decoded == transcribe(model, clip));

  Rng rng(2006);
  const double eps = 1e-5;
  for (int probe = 0; probe < 10; ++probe) {
    const auto i = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(samples.size()) - 1));
    const double keep = samples[i];
    samples[i] = keep + eps;
    const double up = waveform_loss_grad(model, samples, target, nullptr);
    samples[i] = keep - eps;
    const double down = waveform_loss_grad(model, samples, target, nullptr);
    samples[i] = keep;
    const double fd = (up - down) / (2.0 * eps);
    CAPTURE(i);
    REQUIRE(std::abs(grad[i] - fd) < 1e-3 * std::max({std::abs(fd), std::abs(grad[i]), 1e-6}));
  }
}

TEST_CASE("synthesis is deterministic and shaped as specified") {
  const SynthesisSpec spec;
  const AudioClip a1 = synthesize("abc", "s", 7, spec);
  const AudioClip a2 = synthesize("abc", "s", 7, spec);
  CHECK(a1.samples == a2.samples);
  const AudioClip a3 = synthesize("abc", "s", 8, spec);
  CHECK(a1.samples != a3.samples);  // different noise

  // 80 ms per character at 16 kHz
  CHECK(a1.samples.size() == 3 * 1280);
  CHECK(synthesize("ab cd", "s", 7, spec).samples.size() == 5 * 1280);
  CHECK_THROWS_AS((void)synthesize("xyz", "s", 7, spec), AlphabetError);

  // amplitude ramps keep the segment edges quiet
  CHECK(std::abs(a1.samples.front()) < 1000);
  CHECK(std::abs(a1.samples.back()) < 1000);
}

TEST_CASE("each character lands on its own spectral bin") {
  // 'a' -> 400 Hz -> bin 6.4 at 62.5 Hz spacing; 'e' -> 880 Hz -> bin 14.1
  const StftConfig cfg;
  for (const auto& [text, lo, hi] : {std::tuple<const char*, std::size_t, std::size_t>{"a", 6, 7},
                                     {"e", 14, 15}, {"j", 24, 25}}) {
    const AudioClip clip = synthesize(text, "bin", 3, SynthesisSpec{});
    const FeatureMatrix feats = log_magnitude_features(to_real(clip).values, cfg);
    const std::size_t mid = feats.frames / 2;
    std::size_t argmax = 0;
    for (std::size_t k = 1; k < feats.bins; ++k) {
      if (feats.at(mid, k) > feats.at(mid, argmax)) argmax = k;
    }
    CAPTURE(text);
    CHECK(argmax >= lo);
    CHECK(argmax <= hi);
  }
}

TEST_CASE("corpus generation is deterministic and respects bounds") {
  CorpusConfig cfg;
  cfg.count = 12;
  cfg.seed = 5;
  const std::vector<LabeledClip> c1 = make_corpus(cfg);
  const std::vector<LabeledClip> c2 = make_corpus(cfg);
  REQUIRE(c1.size() == 12);
  for (std::size_t i = 0; i < c1.size(); ++i) {
    CHECK(c1[i].clip.samples == c2[i].clip.samples);
    CHECK(c1[i].text == c2[i].text);
    const auto words = split_words(c1[i].text);
    CHECK(words.size() >= 3);
    CHECK(words.size() <= 8);
    for (const std::string& w : words) {
      CHECK(w.size() >= 2);
      CHECK(w.size() <= 5);
    }
  }
  // ids are distinct and ordered
  CHECK(c1[0].clip.id != c1[1].clip.id);
}

TEST_CASE("model artifact round-trips bit-exactly") {
  ToyRnn model = ToyRnn::random_init(RnnDims{}, 11, 0.05);
  std::vector<double> shift(model.dims().input), scale(model.dims().input);
  Rng rng(404);
  for (double& s : shift) s = rng.uniform(-5.0, 5.0);
  for (double& s : scale) s = rng.uniform(0.1, 4.0);
  model.set_feature_norm(shift, scale);

  const auto path = std::filesystem::temp_directory_path() / "tda-test-rnn.bin";
  model.save(path);
  const ToyRnn back = ToyRnn::load(path);
  CHECK(back.dims() == model.dims());
  CHECK(back.params() == model.params());  // bit-exact
  CHECK(back.feature_shift() == shift);
  CHECK(back.feature_scale() == scale);
  std::filesystem::remove(path);

  const auto junk = std::filesystem::temp_directory_path() / "tda-test-junk.bin";
  std::ofstream(junk, std::ios::binary) << "not a model";
  CHECK_THROWS_AS((void)ToyRnn::load(junk), ModelFormatError);
  std::filesystem::remove(junk);
}

TEST_CASE("training reduces the loss and is bit-deterministic") {
  CorpusConfig ccfg;
  ccfg.count = 6;
  ccfg.min_words = 1;
  ccfg.max_words = 2;
  ccfg.seed = 21;
  const std::vector<LabeledClip> corpus = make_corpus(ccfg);

  TrainConfig tcfg;
  tcfg.epochs = 8;
  tcfg.seed = 3;
  std::vector<double> losses1, losses2;
  const ToyRnn m1 = train_toy_rnn(corpus, tcfg, &losses1);
  const ToyRnn m2 = train_toy_rnn(corpus, tcfg, &losses2);
  REQUIRE(losses1.size() == 8);
  CHECK(losses1 == losses2);                    // identical trajectories
  CHECK(m1.params() == m2.params());            // bit-identical weights
  CHECK(losses1.back() < losses1.front());      // it actually learns
  for (double l : losses1) CHECK(std::isfinite(l));
}

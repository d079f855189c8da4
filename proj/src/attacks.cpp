// src/attacks.cpp
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

#include "tda/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "tda/dsp.hpp"
#include "tda/errors.hpp"
#include "tda/random.hpp"
#include "tda/text_metrics.hpp"

namespace tda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One attack formulation: how to evaluate the objective at the optimization
// variable u, how to keep u feasible, how to check success on materialized
// 16-bit audio, and what perturbation u corresponds to at the original rate.
struct OptProblem {
  std::size_t dim = 0;
  std::function<double(const std::vector<double>& u, double c, std::vector<double>& grad,
                       std::string& probe)>
      eval;
  std::function<void(std::vector<double>& u)> project;  // optional
  std::function<bool(const std::vector<double>& u, std::string& achieved)> verify;
  std::function<RealWave(const std::vector<double>& u)> delta_of;
};

double norm2(const std::vector<double>& v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

void validate_config(const AttackConfig& cfg) {
  if (cfg.c_schedule.empty()) throw ConfigError("attack: empty c schedule");
  for (std::size_t i = 0; i < cfg.c_schedule.size(); ++i) {
    if (cfg.c_schedule[i] < 0.0) throw ConfigError("attack: negative c");
    if (i > 0 && cfg.c_schedule[i] <= cfg.c_schedule[i - 1]) {
      throw ConfigError("attack: c schedule must be strictly ascending");
    }
  }
  if (cfg.iters_per_c == 0) throw ConfigError("attack: zero iteration budget");
  if (!(cfg.step_size > 0.0)) throw ConfigError("attack: step size must be positive");
}

// target must fit the CTC lattice of `frames`: one frame per label plus a
// separating blank between equal neighbors
void check_target_fits(std::size_t frames, const std::vector<int>& target,
                       const std::string& what) {
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++repeats;
  }
  if (frames < target.size() + repeats) {
    throw TargetTooLongError("attack: " + what + " needs " +
                             std::to_string(target.size() + repeats) + " frames, clip has " +
                             std::to_string(frames));
  }
}

struct Adam {
  std::vector<double> m, v;
  std::size_t step = 0;

  explicit Adam(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {}
  void reset() {
    std::fill(m.begin(), m.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    step = 0;
  }
  void update(std::vector<double>& u, const std::vector<double>& grad, double lr) {
    ++step;
    const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(step));
    for (std::size_t i = 0; i < u.size(); ++i) {
      m[i] = 0.9 * m[i] + 0.1 * grad[i];
      v[i] = 0.999 * v[i] + 0.001 * grad[i] * grad[i];
      u[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + 1e-8);
    }
  }
};

// The c-schedule / success / refinement driver shared by every variant.
AttackResult run_core(const OptProblem& prob, const AttackConfig& cfg, const AudioClip& clip,
                      const std::string& target_text) {
  validate_config(cfg);

  std::vector<double> u(prob.dim, 0.0), grad(prob.dim, 0.0);
  Adam adam(prob.dim);
  AttackResult result;

  std::string probe, achieved;
  std::size_t total_iters = 0;
  double best_obj = kInf;
  bool success = false;
  double c_success = 0.0;
  std::vector<double> best_u;

  for (double c : cfg.c_schedule) {
    adam.reset();  // fresh moments per c stage; delta itself is warm-started
    for (std::size_t it = 0; it < cfg.iters_per_c && !success; ++it) {
      const double obj = prob.eval(u, c, grad, probe);
      ++total_iters;
      best_obj = std::min(best_obj, obj);
      if (cfg.record_trace) result.objective_trace.push_back(best_obj);
      if (probe == target_text && prob.verify(u, achieved)) {
        success = true;
        c_success = c;
        best_u = u;
        break;
      }
      adam.update(u, grad, cfg.step_size);
      if (prob.project) prob.project(u);
    }
    if (success) break;
  }

  if (success) {
    double best_norm = norm2(prob.delta_of(best_u).values);
    if (best_norm > 0.0 && cfg.refine_iters > 0) {
      // keep optimizing at the successful c; the ||delta||^2 term shrinks the
      // perturbation while the CTC term holds the decode; keep the smallest
      // verified delta seen
      adam.reset();
      for (std::size_t it = 0; it < cfg.refine_iters; ++it) {
        const double obj = prob.eval(u, c_success, grad, probe);
        ++total_iters;
        best_obj = std::min(best_obj, obj);
        if (cfg.record_trace) result.objective_trace.push_back(best_obj);
        if (probe == target_text) {
          const double n2 = norm2(prob.delta_of(u).values);
          std::string refined;
          if (n2 < best_norm && prob.verify(u, refined)) {
            best_norm = n2;
            best_u = u;
          }
        }
        adam.update(u, grad, cfg.step_size);
        if (prob.project) prob.project(u);
      }
    }
    u = best_u;
  }
  prob.verify(u, achieved);  // (re)compute the achieved transcript for the returned u

  result.success = success;
  result.achieved = achieved;
  result.c_used = success ? c_success : cfg.c_schedule.back();
  result.iterations = total_iters;
  result.delta = prob.delta_of(u);

  const AudioClip delta_clip = to_clip(result.delta, clip.id + "#delta");
  const bool silent = std::all_of(delta_clip.samples.begin(), delta_clip.samples.end(),
                                  [](std::int16_t s) { return s == 0; });
  result.db = silent ? -kInf : db_distortion(clip, delta_clip);
  return result;
}

// ---------------------------------------------------------------------------
// Problem builders
// ---------------------------------------------------------------------------

// prefix_len == dim means no mask (plain); smaller means segment attack.
OptProblem make_plain_problem(const ToyRnn& model, const AudioClip& clip,
                              const std::string& target_text, std::size_t prefix_len) {
  auto x = std::make_shared<const std::vector<double>>(to_real(clip).values);
  auto target = std::make_shared<const std::vector<int>>(encode_text(target_text));
  check_target_fits(frame_count(x->size(), model.frontend()), *target, "target");

  OptProblem prob;
  prob.dim = x->size();
  const std::size_t mask = std::min(prefix_len, x->size());
  const int rate = clip.sample_rate;

  prob.eval = [&model, x, target, mask](const std::vector<double>& u, double c,
                                        std::vector<double>& grad, std::string& probe) {
    std::vector<double> y(x->size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = (*x)[i] + u[i];
    std::vector<double> g;
    const WaveformEval we = waveform_eval(model, y, *target, &g);
    probe = we.decoded;
    grad.assign(u.size(), 0.0);
    for (std::size_t i = 0; i < mask; ++i) grad[i] = 2.0 * u[i] + c * g[i];
    return norm2(u) + c * we.loss;
  };
  prob.project = [x, mask](std::vector<double>& u) {
    for (std::size_t i = 0; i < mask; ++i) {
      u[i] = std::clamp((*x)[i] + u[i], kRealAmpMin, kRealAmpMax) - (*x)[i];
    }
    for (std::size_t i = mask; i < u.size(); ++i) u[i] = 0.0;
  };
  prob.verify = [&model, x, target_text, rate, id = clip.id](const std::vector<double>& u,
                                                             std::string& achieved) {
    std::vector<double> y(x->size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = (*x)[i] + u[i];
    achieved = transcribe(model, to_clip(RealWave{std::move(y), rate}, id + "#adv"));
    return achieved == target_text;
  };
  prob.delta_of = [rate](const std::vector<double>& u) { return RealWave{u, rate}; };
  return prob;
}

OptProblem make_quantize_problem(const ToyRnn& model, const AudioClip& clip,
                                 const std::string& target_text, int q) {
  if (q < 1) throw ConfigError("attack: quantize q must be >= 1");
  auto target = std::make_shared<const std::vector<int>>(encode_text(target_text));
  check_target_fits(frame_count(clip.samples.size(), model.frontend()), *target, "target");

  // the defense maps x + m*q to quantize(x) + m*q, so optimize against the
  // quantized base and keep u in units of q
  auto base = std::make_shared<const std::vector<double>>(to_real(quantize_clip(clip, q)).values);
  auto orig = std::make_shared<const AudioClip>(clip);
  const double q_norm = static_cast<double>(q) / kInt16Scale;

  // per-sample integer bounds keeping x + q*round(u) inside int16
  auto lo = std::make_shared<std::vector<double>>(clip.samples.size());
  auto hi = std::make_shared<std::vector<double>>(clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    (*lo)[i] = std::ceil((-32768.0 - clip.samples[i]) / q);
    (*hi)[i] = std::floor((32767.0 - clip.samples[i]) / q);
  }

  OptProblem prob;
  prob.dim = clip.samples.size();
  prob.eval = [&model, base, target, q_norm](const std::vector<double>& u, double c,
                                             std::vector<double>& grad, std::string& probe) {
    std::vector<double> y(base->size());
    double p_norm2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double p = q_norm * u[i];
      y[i] = (*base)[i] + p;
      p_norm2 += p * p;
    }
    std::vector<double> g;
    const WaveformEval we = waveform_eval(model, y, *target, &g);
    probe = we.decoded;
    grad.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      grad[i] = q_norm * (2.0 * q_norm * u[i] + c * g[i]);
    }
    return p_norm2 + c * we.loss;
  };
  prob.project = [lo, hi](std::vector<double>& u) {
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::clamp(u[i], (*lo)[i], (*hi)[i]);
  };
  prob.verify = [&model, orig, target_text, q](const std::vector<double>& u,
                                               std::string& achieved) {
    AudioClip adv = *orig;
    adv.id += "#adv";
    for (std::size_t i = 0; i < u.size(); ++i) {
      const std::int64_t v = adv.samples[i] + static_cast<std::int64_t>(q) * std::llround(u[i]);
      adv.samples[i] = static_cast<std::int16_t>(std::clamp<std::int64_t>(v, -32768, 32767));
    }
    achieved = transcribe(model, quantize_clip(adv, q));
    return achieved == target_text;
  };
  prob.delta_of = [q_norm, rate = clip.sample_rate](const std::vector<double>& u) {
    RealWave d;
    d.sample_rate = rate;
    d.values.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      d.values[i] = q_norm * static_cast<double>(std::llround(u[i]));
    }
    return d;
  };
  return prob;
}

OptProblem make_downsample_problem(const ToyRnn& model, const AudioClip& clip,
                                   const std::string& target_text, int factor) {
  auto target = std::make_shared<const std::vector<int>>(encode_text(target_text));
  check_target_fits(frame_count(clip.samples.size(), model.frontend()), *target, "target");

  auto x = std::make_shared<const std::vector<double>>(to_real(clip).values);
  auto kernel = std::make_shared<const std::vector<double>>(downsample_kernel(factor));
  const auto f = static_cast<std::size_t>(factor);
  const std::size_t n = x->size();
  const std::size_t m = (n - 1) / f + 1;  // decimated sample count
  const int rate = clip.sample_rate;

  // recovery: zero-stuff to the full grid and low-pass with gain `factor` —
  // the same operator the defense uses to come back up
  auto recover = [kernel, f, n](const std::vector<double>& u) {
    std::vector<double> stuffed(u.size() * f, 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) stuffed[i * f] = u[i];
    std::vector<double> r = fir_same(stuffed, *kernel);
    r.resize(n);
    for (double& v : r) v *= static_cast<double>(f);
    return r;
  };
  auto recover_adj = [kernel, f, m](const std::vector<double>& g) {
    std::vector<double> gpad = g;
    gpad.resize(m * f, 0.0);
    for (double& v : gpad) v *= static_cast<double>(f);
    const std::vector<double> s = fir_same_adjoint(gpad, *kernel);
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = s[i * f];
    return out;
  };
  // the defense itself, on reals: LPF -> decimate -> recover
  auto defense = [kernel, f, n, recover](const std::vector<double>& y) {
    const std::vector<double> a = fir_same(y, *kernel);
    std::vector<double> d;
    d.reserve((n - 1) / f + 1);
    for (std::size_t i = 0; i < n; i += f) d.push_back(a[i]);
    return recover(d);
  };
  auto defense_adj = [kernel, f, n, recover_adj](const std::vector<double>& gz) {
    const std::vector<double> gd = recover_adj(gz);
    std::vector<double> ga(n, 0.0);
    for (std::size_t i = 0; i < gd.size(); ++i) ga[i * f] = gd[i];
    return fir_same_adjoint(ga, *kernel);
  };

  OptProblem prob;
  prob.dim = m;
  prob.eval = [&model, x, target, recover, recover_adj, defense, defense_adj](
                  const std::vector<double>& u, double c, std::vector<double>& grad,
                  std::string& probe) {
    const std::vector<double> p = recover(u);
    std::vector<double> y(x->size());
    std::vector<double> inside(x->size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double raw = (*x)[i] + p[i];
      y[i] = std::clamp(raw, kRealAmpMin, kRealAmpMax);
      inside[i] = (raw > kRealAmpMin && raw < kRealAmpMax) ? 1.0 : 0.0;
    }
    const std::vector<double> z = defense(y);
    std::vector<double> gz;
    const WaveformEval we = waveform_eval(model, z, *target, &gz);
    probe = we.decoded;

    std::vector<double> gy = defense_adj(gz);
    for (std::size_t i = 0; i < gy.size(); ++i) gy[i] = inside[i] * (c * gy[i]) + 2.0 * p[i];
    grad = recover_adj(gy);
    return norm2(p) + c * we.loss;
  };
  prob.verify = [&model, x, target_text, recover, rate, factor, id = clip.id](
                    const std::vector<double>& u, std::string& achieved) {
    const std::vector<double> p = recover(u);
    std::vector<double> y(x->size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = (*x)[i] + p[i];
    const AudioClip adv = to_clip(RealWave{std::move(y), rate}, id + "#adv");
    achieved = transcribe(model, downsample_clip(adv, factor));
    return achieved == target_text;
  };
  prob.delta_of = [x, recover, rate](const std::vector<double>& u) {
    std::vector<double> p = recover(u);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = std::clamp((*x)[i] + p[i], kRealAmpMin, kRealAmpMax) - (*x)[i];
    }
    return RealWave{std::move(p), rate};
  };
  return prob;
}

OptProblem make_smooth_problem(const ToyRnn& model, const AudioClip& clip,
                               const std::string& target_text, SmoothKind kind,
                               std::size_t half_width) {
  if (half_width < 1) throw ConfigError("attack: smooth half_width must be >= 1");
  auto target = std::make_shared<const std::vector<int>>(encode_text(target_text));
  check_target_fits(frame_count(clip.samples.size(), model.frontend()), *target, "target");

  auto x = std::make_shared<const std::vector<double>>(to_real(clip).values);
  const std::size_t n = x->size();
  const auto radius = static_cast<std::ptrdiff_t>(half_width - 1);
  const std::size_t width = 2 * half_width - 1;
  const int rate = clip.sample_rate;

  // forward smoother on reals; median also reports which source index each
  // output came from so the gradient can be routed there
  auto smooth_fwd = [n, radius, width, kind](const std::vector<double>& y,
                                             std::vector<std::size_t>* argmed) {
    std::vector<double> z(n);
    std::vector<std::pair<double, std::size_t>> window(width);
    for (std::size_t i = 0; i < n; ++i) {
      if (kind == SmoothKind::kAverage) {
        double acc = 0.0;
        for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
          const auto j = static_cast<std::size_t>(
              std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) + d, 0,
                                         static_cast<std::ptrdiff_t>(n) - 1));
          acc += y[j];
        }
        z[i] = acc / static_cast<double>(width);
      } else {
        for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
          const auto j = static_cast<std::size_t>(
              std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) + d, 0,
                                         static_cast<std::ptrdiff_t>(n) - 1));
          window[static_cast<std::size_t>(d + radius)] = {y[j], j};
        }
        // ties resolve to the lowest source index (pair ordering)
        std::sort(window.begin(), window.end());
        z[i] = window[width / 2].first;
        if (argmed) (*argmed)[i] = window[width / 2].second;
      }
    }
    return z;
  };

  OptProblem prob;
  prob.dim = n;
  prob.eval = [&model, x, target, smooth_fwd, n, radius, width, kind](
                  const std::vector<double>& u, double c, std::vector<double>& grad,
                  std::string& probe) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = (*x)[i] + u[i];
    std::vector<std::size_t> argmed(kind == SmoothKind::kMedian ? n : 0);
    const std::vector<double> z =
        smooth_fwd(y, kind == SmoothKind::kMedian ? &argmed : nullptr);
    std::vector<double> gz;
    const WaveformEval we = waveform_eval(model, z, *target, &gz);
    probe = we.decoded;

    grad.assign(n, 0.0);
    if (kind == SmoothKind::kAverage) {
      const double inv_w = 1.0 / static_cast<double>(width);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
          const auto j = static_cast<std::size_t>(
              std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) + d, 0,
                                         static_cast<std::ptrdiff_t>(n) - 1));
          grad[j] += gz[i] * inv_w;
        }
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) grad[argmed[i]] += gz[i];
    }
    for (std::size_t i = 0; i < n; ++i) grad[i] = c * grad[i] + 2.0 * u[i];
    return norm2(u) + c * we.loss;
  };
  prob.project = [x](std::vector<double>& u) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = std::clamp((*x)[i] + u[i], kRealAmpMin, kRealAmpMax) - (*x)[i];
    }
  };
  prob.verify = [&model, x, target_text, kind, half_width, rate, id = clip.id](
                    const std::vector<double>& u, std::string& achieved) {
    std::vector<double> y(x->size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = (*x)[i] + u[i];
    const AudioClip adv = to_clip(RealWave{std::move(y), rate}, id + "#adv");
    achieved = transcribe(model, smooth_clip(adv, half_width, kind));
    return achieved == target_text;
  };
  prob.delta_of = [rate](const std::vector<double>& u) { return RealWave{u, rate}; };
  return prob;
}

std::string join_words(const std::vector<std::string>& words, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < std::min(count, words.size()); ++i) {
    if (i > 0) out.push_back(' ');
    out += words[i];
  }
  return out;
}

OptProblem make_combination_problem(const ToyRnn& model, const AudioClip& clip,
                                    const std::string& target_text, const AttackConfig& cfg) {
  auto x = std::make_shared<const std::vector<double>>(to_real(clip).values);
  auto full_target = std::make_shared<const std::vector<int>>(encode_text(target_text));
  const std::size_t n = x->size();
  const StftConfig& fe = model.frontend();
  check_target_fits(frame_count(n, fe), *full_target, "target");

  auto words = std::make_shared<const std::vector<std::string>>(split_words(target_text));

  struct FixedTerm {
    double k;
    std::size_t prefix_len;
    std::vector<int> labels;
    std::string text;
  };
  auto fixed = std::make_shared<std::vector<FixedTerm>>();
  struct RandTerm {
    double lo, hi;
    std::shared_ptr<Rng> rng;
  };
  auto rand_terms = std::make_shared<std::vector<RandTerm>>();

  if (cfg.k_attack.empty()) {
    throw ConfigError("attack: combination variant needs at least one k");
  }
  std::size_t rand_index = 0;
  for (const KSpec& spec : cfg.k_attack) {
    if (const auto* k = std::get_if<double>(&spec)) {
      if (!(*k > 0.0 && *k < 1.0)) throw ConfigError("attack: combination k outside (0,1)");
      FixedTerm term;
      term.k = *k;
      term.prefix_len = static_cast<std::size_t>(std::floor(*k * static_cast<double>(n)));
      const auto word_count =
          static_cast<std::size_t>(std::ceil(*k * static_cast<double>(words->size())));
      term.text = join_words(*words, word_count);
      term.labels = encode_text(term.text);
      check_target_fits(frame_count(term.prefix_len, fe), term.labels,
                        "prefix target (k=" + std::to_string(*k) + ")");
      fixed->push_back(std::move(term));
    } else {
      const RandK& r = std::get<RandK>(spec);
      if (!(r.lo > 0.0 && r.lo < r.hi && r.hi < 1.0)) {
        throw ConfigError("attack: combination Rand k bounds must satisfy 0 < lo < hi < 1");
      }
      RandTerm term{r.lo, r.hi,
                    std::make_shared<Rng>(mix_seed(
                        cfg.seed, clip.id + ":randk:" + std::to_string(rand_index++)))};
      rand_terms->push_back(std::move(term));
    }
  }

  OptProblem prob;
  prob.dim = n;
  prob.eval = [&model, x, full_target, words, fixed, rand_terms, n, fe](
                  const std::vector<double>& u, double c, std::vector<double>& grad,
                  std::string& probe) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = (*x)[i] + u[i];

    std::vector<double> g;
    const WaveformEval full = waveform_eval(model, y, *full_target, &g);
    probe = full.decoded;
    double ctc_sum = full.loss;
    grad.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) grad[i] = g[i];

    auto add_prefix_term = [&](std::size_t prefix_len, const std::vector<int>& labels) {
      std::vector<double> prefix(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(prefix_len));
      std::vector<double> gp;
      const WaveformEval we = waveform_eval(model, prefix, labels, &gp);
      ctc_sum += we.loss;
      for (std::size_t i = 0; i < prefix_len; ++i) grad[i] += gp[i];
    };
    for (const FixedTerm& term : *fixed) add_prefix_term(term.prefix_len, term.labels);
    for (const RandTerm& term : *rand_terms) {
      // a fresh k every iteration, as a moving target for the detector
      const double k = term.rng->uniform(term.lo, term.hi);
      const auto prefix_len = static_cast<std::size_t>(std::floor(k * static_cast<double>(n)));
      const auto word_count =
          static_cast<std::size_t>(std::ceil(k * static_cast<double>(words->size())));
      const std::vector<int> labels = encode_text(join_words(*words, word_count));
      if (prefix_len < fe.frame_length) continue;
      std::size_t repeats = 0;
      for (std::size_t i = 1; i < labels.size(); ++i) {
        if (labels[i] == labels[i - 1]) ++repeats;
      }
      if (frame_count(prefix_len, fe) < labels.size() + repeats) continue;  // infeasible draw
      add_prefix_term(prefix_len, labels);
    }

    for (std::size_t i = 0; i < n; ++i) grad[i] = c * grad[i] + 2.0 * u[i];
    return norm2(u) + c * ctc_sum;
  };
  prob.project = [x](std::vector<double>& u) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = std::clamp((*x)[i] + u[i], kRealAmpMin, kRealAmpMax) - (*x)[i];
    }
  };
  prob.verify = [&model, x, target_text, fixed, rate = clip.sample_rate, id = clip.id](
                    const std::vector<double>& u, std::string& achieved) {
    std::vector<double> y(x->size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = (*x)[i] + u[i];
    const AudioClip adv = to_clip(RealWave{y, rate}, id + "#adv");
    achieved = transcribe(model, adv);
    if (achieved != target_text) return false;
    for (const FixedTerm& term : *fixed) {
      AudioClip prefix;
      prefix.id = adv.id + "#k";
      prefix.sample_rate = rate;
      prefix.samples.assign(adv.samples.begin(),
                            adv.samples.begin() + static_cast<std::ptrdiff_t>(term.prefix_len));
      if (transcribe(model, prefix) != term.text) return false;
    }
    return true;
  };
  prob.delta_of = [rate = clip.sample_rate](const std::vector<double>& u) {
    return RealWave{u, rate};
  };
  return prob;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

AudioClip apply_delta(const AudioClip& clip, const RealWave& delta) {
  if (clip.samples.size() != delta.values.size()) {
    throw SizeMismatchError("apply_delta: length mismatch");
  }
  RealWave y = to_real(clip);
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += delta.values[i];
  return to_clip(y, clip.id);
}

AttackResult opt_attack(const ToyRnn& model, const AudioClip& clip, const AttackConfig& cfg) {
  const std::string target_text = normalize_text(cfg.target);
  OptProblem prob;
  switch (cfg.adaptive) {
    case AdaptiveMode::kNone:
      prob = make_plain_problem(model, clip, target_text, clip.samples.size());
      break;
    case AdaptiveMode::kQuantize:
      prob = make_quantize_problem(model, clip, target_text, cfg.quantize_q);
      break;
    case AdaptiveMode::kDownsample:
      prob = make_downsample_problem(model, clip, target_text, cfg.downsample_factor);
      break;
    case AdaptiveMode::kSmooth:
      prob = make_smooth_problem(model, clip, target_text, cfg.smooth_kind,
                                 cfg.smooth_half_width);
      break;
  }
  return run_core(prob, cfg, clip, target_text);
}

AttackResult segment_attack(const ToyRnn& model, const AudioClip& clip, const AttackConfig& cfg) {
  if (!(cfg.variant_k > 0.0 && cfg.variant_k < 1.0)) {
    throw ConfigError("segment attack: k outside (0,1)");
  }
  const std::string target_text = normalize_text(cfg.target);
  const auto prefix_len = static_cast<std::size_t>(
      std::floor(cfg.variant_k * static_cast<double>(clip.samples.size())));
  OptProblem prob = make_plain_problem(model, clip, target_text, prefix_len);
  return run_core(prob, cfg, clip, target_text);
}

AttackResult concat_attack(const ToyRnn& model, const AudioClip& clip, const AttackConfig& cfg) {
  if (!(cfg.variant_k > 0.0 && cfg.variant_k < 1.0)) {
    throw ConfigError("concat attack: k outside (0,1)");
  }
  const std::string target_text = normalize_text(cfg.target);
  const std::size_t n = clip.samples.size();
  const auto n1 = static_cast<std::size_t>(std::floor(cfg.variant_k * static_cast<double>(n)));
  if (n1 == 0 || n1 >= n) throw ClipTooShortError("concat attack: degenerate split");

  AudioClip part1, part2;
  part1.id = clip.id + "#part1";
  part2.id = clip.id + "#part2";
  part1.sample_rate = part2.sample_rate = clip.sample_rate;
  part1.samples.assign(clip.samples.begin(), clip.samples.begin() + static_cast<std::ptrdiff_t>(n1));
  part2.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(n1), clip.samples.end());

  std::string t1, t2;
  if (cfg.variant == AttackVariant::kConcatSilence) {
    t1 = target_text;  // the prefix alone must already say everything
    t2 = "";
  } else {
    const std::vector<std::string> words = split_words(target_text);
    const auto m = static_cast<std::size_t>(
        std::ceil(cfg.variant_k * static_cast<double>(words.size())));
    t1 = join_words(words, m);
    std::string rest;
    for (std::size_t i = m; i < words.size(); ++i) {
      if (!rest.empty()) rest.push_back(' ');
      rest += words[i];
    }
    t2 = rest;
  }

  // each part is attacked as an independent clip with the plain objective
  AttackConfig part_cfg = cfg;
  part_cfg.variant = AttackVariant::kPlain;
  OptProblem prob1 = make_plain_problem(model, part1, t1, part1.samples.size());
  part_cfg.target = t1;
  const AttackResult r1 = run_core(prob1, part_cfg, part1, t1);
  OptProblem prob2 = make_plain_problem(model, part2, t2, part2.samples.size());
  part_cfg.target = t2;
  const AttackResult r2 = run_core(prob2, part_cfg, part2, t2);

  AttackResult result;
  result.part1_success = r1.success;
  result.part2_success = r2.success;
  result.part1_transcript = r1.achieved;
  result.part2_transcript = r2.achieved;
  result.iterations = r1.iterations + r2.iterations;
  result.c_used = std::max(r1.c_used, r2.c_used);

  result.delta.sample_rate = clip.sample_rate;
  result.delta.values = r1.delta.values;
  result.delta.values.insert(result.delta.values.end(), r2.delta.values.begin(),
                             r2.delta.values.end());

  const AudioClip joined = apply_delta(clip, result.delta);
  result.achieved = transcribe(model, joined);
  result.success = (result.achieved == target_text);

  const AudioClip delta_clip = to_clip(result.delta, clip.id + "#delta");
  const bool silent = std::all_of(delta_clip.samples.begin(), delta_clip.samples.end(),
                                  [](std::int16_t s) { return s == 0; });
  result.db = silent ? -kInf : db_distortion(clip, delta_clip);
  return result;
}

AttackResult combination_attack(const ToyRnn& model, const AudioClip& clip,
                                const AttackConfig& cfg) {
  const std::string target_text = normalize_text(cfg.target);
  OptProblem prob = make_combination_problem(model, clip, target_text, cfg);
  return run_core(prob, cfg, clip, target_text);
}

AttackResult run_attack(const ToyRnn& model, const AudioClip& clip, const AttackConfig& cfg) {
  switch (cfg.variant) {
    case AttackVariant::kPlain:
      return opt_attack(model, clip, cfg);
    case AttackVariant::kSegment:
      return segment_attack(model, clip, cfg);
    case AttackVariant::kConcatSplit:
    case AttackVariant::kConcatSilence:
      return concat_attack(model, clip, cfg);
    case AttackVariant::kCombination:
      return combination_attack(model, clip, cfg);
  }
  throw ConfigError("run_attack: unknown variant");
}

}  // namespace tda

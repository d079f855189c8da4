// src/eval.cpp
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

#include "tda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "tda/errors.hpp"
#include "tda/parallel.hpp"
#include "tda/text_metrics.hpp"

namespace tda {

namespace {

using nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

int label_from_string(const std::string& s, std::size_t line) {
  if (s == "benign") return 0;
  if (s == "adversarial") return 1;
  throw ManifestError("manifest line " + std::to_string(line) +
                      ": label must be \"benign\" or \"adversarial\", got \"" + s + "\"");
}

const char* label_to_string(int label) { return label == 0 ? "benign" : "adversarial"; }

void check_record(const ClipRecord& r, const std::string& where) {
  if (r.id.empty()) throw ManifestError(where + ": empty id");
  if (r.path.empty()) throw ManifestError(where + ": empty path");
  if (r.ground_truth.empty()) throw ManifestError(where + ": empty ground_truth");
  if (r.label != 0 && r.label != 1) throw ManifestError(where + ": label out of range");
  if (r.label == 0 && !r.adversarial_target.empty()) {
    throw ManifestError(where + ": benign record carries an adversarial_target");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

std::vector<ClipRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest: " + path.string());

  std::vector<ClipRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw ManifestError("manifest line " + std::to_string(line_no) + ": malformed JSON");
    }
    const std::string where = "manifest line " + std::to_string(line_no);
    auto need_string = [&](const char* key) -> std::string {
      if (!doc.contains(key) || !doc[key].is_string()) {
        throw ManifestError(where + ": missing string field \"" + key + "\"");
      }
      return doc[key].get<std::string>();
    };
    ClipRecord r;
    r.id = need_string("id");
    r.path = need_string("path");
    r.ground_truth = need_string("ground_truth");
    r.label = label_from_string(need_string("label"), line_no);
    if (doc.contains("adversarial_target")) {
      if (!doc["adversarial_target"].is_string()) {
        throw ManifestError(where + ": adversarial_target must be a string");
      }
      r.adversarial_target = doc["adversarial_target"].get<std::string>();
    }
    check_record(r, where);
    if (!seen.insert(r.id).second) {
      throw ManifestError(where + ": duplicate id \"" + r.id + "\"");
    }
    records.push_back(std::move(r));
  }
  return records;
}

void save_manifest(const std::vector<ClipRecord>& records, const std::filesystem::path& path) {
  std::set<std::string> seen;
  for (const ClipRecord& r : records) {
    check_record(r, "record \"" + r.id + "\"");
    if (!seen.insert(r.id).second) {
      throw ManifestError("duplicate id \"" + r.id + "\"");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  for (const ClipRecord& r : records) {
    ordered_json doc;
    doc["id"] = r.id;
    doc["path"] = r.path;
    doc["ground_truth"] = r.ground_truth;
    doc["label"] = label_to_string(r.label);
    if (r.label == 1 && !r.adversarial_target.empty()) {
      doc["adversarial_target"] = r.adversarial_target;
    }
    out << doc.dump() << '\n';
  }
  if (!out) throw IoError("short write: " + path.string());
}

AudioClip load_clip(const ClipRecord& record, const std::filesystem::path& base_dir) {
  std::filesystem::path p(record.path);
  if (p.is_relative()) p = base_dir / p;
  AudioClip clip = read_wav(p);
  clip.id = record.id;
  return clip;
}

// ---------------------------------------------------------------------------
// Ranking metrics
// ---------------------------------------------------------------------------

double auc(const std::vector<Scored>& scored) {
  std::size_t n_pos = 0, n_neg = 0;
  for (const Scored& s : scored) (s.label == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw SingleClassError("auc: need at least one benign and one adversarial score");
  }

  std::vector<Scored> sorted = scored;
  std::sort(sorted.begin(), sorted.end(),
            [](const Scored& a, const Scored& b) { return a.score < b.score; });

  // integer win/tie counts over rank groups keep the statistic exact
  unsigned long long wins = 0, ties = 0, neg_below = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    unsigned long long pos_here = 0, neg_here = 0;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      (sorted[j].label == 1 ? pos_here : neg_here) += 1;
      ++j;
    }
    wins += pos_here * neg_below;
    ties += pos_here * neg_here;
    neg_below += neg_here;
    i = j;
  }
  // complementary form: rounding the smaller tail keeps label-flip symmetry
  // (auc + auc_flipped == 1) exact in floating point
  const double p = 2.0 * static_cast<double>(wins) + static_cast<double>(ties);
  const double q = 2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg);
  return (2.0 * p <= q) ? p / q : 1.0 - (q - p) / q;
}

std::vector<RocPoint> roc_curve(const std::vector<Scored>& scored) {
  std::size_t n_pos = 0, n_neg = 0;
  for (const Scored& s : scored) (s.label == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw SingleClassError("roc_curve: need at least one benign and one adversarial score");
  }

  std::vector<Scored> sorted = scored;
  std::sort(sorted.begin(), sorted.end(),
            [](const Scored& a, const Scored& b) { return a.score > b.score; });

  std::vector<RocPoint> points;
  points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      (sorted[j].label == 1 ? tp : fp) += 1;
      ++j;
    }
    points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                      static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  return points;
}

double roc_area(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += 0.5 * (points[i].tpr + points[i - 1].tpr) * (points[i].fpr - points[i - 1].fpr);
  }
  return area;
}

std::string roc_points_text(const std::vector<RocPoint>& points) {
  std::ostringstream out;
  out.precision(9);
  out << std::fixed;
  for (const RocPoint& p : points) out << p.fpr << ' ' << p.tpr << '\n';
  return out.str();
}

double detection_rate(const std::vector<Scored>& scored, double threshold) {
  std::size_t adv = 0, flagged = 0;
  for (const Scored& s : scored) {
    if (s.label != 1) continue;
    ++adv;
    if (s.score > threshold) ++flagged;
  }
  if (adv == 0) return 0.0;
  return static_cast<double>(flagged) / static_cast<double>(adv);
}

// ---------------------------------------------------------------------------
// Defense evaluation
// ---------------------------------------------------------------------------

namespace {

void defense_aggregates(const std::vector<DefenseRow>& rows, std::size_t& failures,
                        DefenseGroup& benign, DefenseGroup& adversarial) {
  failures = 0;
  benign = DefenseGroup{};
  adversarial = DefenseGroup{};
  for (const DefenseRow& row : rows) {
    if (!row.ok) {
      ++failures;
      continue;
    }
    DefenseGroup& g = row.label == 0 ? benign : adversarial;
    g.count += 1;
    g.mean_raw_wer += row.raw_wer;
    g.mean_transformed_wer += row.transformed_wer;
    g.mean_raw_cer += row.raw_cer;
    g.mean_transformed_cer += row.transformed_cer;
  }
  for (DefenseGroup* g : {&benign, &adversarial}) {
    if (g->count == 0) continue;
    const double inv = 1.0 / static_cast<double>(g->count);
    g->mean_raw_wer *= inv;
    g->mean_transformed_wer *= inv;
    g->mean_raw_cer *= inv;
    g->mean_transformed_cer *= inv;
    g->ratio_wer.defined = g->mean_raw_wer != 0.0;
    if (g->ratio_wer.defined) g->ratio_wer.value = g->mean_transformed_wer / g->mean_raw_wer;
    g->ratio_cer.defined = g->mean_raw_cer != 0.0;
    if (g->ratio_cer.defined) g->ratio_cer.value = g->mean_transformed_cer / g->mean_raw_cer;
  }
}

bool group_equal(const DefenseGroup& a, const DefenseGroup& b) {
  return a.count == b.count && a.mean_raw_wer == b.mean_raw_wer &&
         a.mean_transformed_wer == b.mean_transformed_wer && a.mean_raw_cer == b.mean_raw_cer &&
         a.mean_transformed_cer == b.mean_transformed_cer &&
         a.ratio_wer.defined == b.ratio_wer.defined && a.ratio_cer.defined == b.ratio_cer.defined &&
         (!a.ratio_wer.defined || a.ratio_wer.value == b.ratio_wer.value) &&
         (!a.ratio_cer.defined || a.ratio_cer.value == b.ratio_cer.value);
}

}  // namespace

DefenseReport run_defense_eval(const Backend& backend, const Transform& transform,
                               const std::vector<ClipRecord>& records,
                               const std::filesystem::path& base_dir, int workers) {
  DefenseReport report;
  report.backend = backend_name(backend);
  report.transform = transform_name(transform);
  report.workers = workers;
  report.rows.resize(records.size());

  parallel_for(records.size(), workers, [&](std::size_t i) {
    const ClipRecord& rec = records[i];
    DefenseRow& row = report.rows[i];
    row.id = rec.id;
    row.label = rec.label;
    try {
      const AudioClip clip = load_clip(rec, base_dir);
      row.raw_transcript = transcribe(backend, clip);
      row.transformed_transcript = transcribe(backend, apply_transform(transform, clip));
      row.raw_wer = wer(rec.ground_truth, row.raw_transcript);
      row.transformed_wer = wer(rec.ground_truth, row.transformed_transcript);
      row.raw_cer = cer(rec.ground_truth, row.raw_transcript);
      row.transformed_cer = cer(rec.ground_truth, row.transformed_transcript);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });

  defense_aggregates(report.rows, report.failures, report.benign, report.adversarial);
  return report;
}

// ---------------------------------------------------------------------------
// Detection evaluation
// ---------------------------------------------------------------------------

std::string k_spec_name(const KSpec& k) {
  if (const auto* fixed = std::get_if<double>(&k)) {
    std::ostringstream out;
    out.precision(6);
    out << *fixed;
    return out.str();
  }
  const RandK& r = std::get<RandK>(k);
  std::ostringstream out;
  out.precision(6);
  out << "rand(" << r.lo << ',' << r.hi << ')';
  return out.str();
}

namespace {

void detection_aggregates(const std::vector<DetectionRecord>& rows, std::size_t& failures,
                          bool& auc_defined, double& auc_wer, double& auc_cer, double& auc_lcp,
                          double& rate_wer, double& rate_cer, double& rate_lcp) {
  failures = 0;
  std::vector<Scored> wer_s, cer_s, lcp_s;
  for (const DetectionRecord& row : rows) {
    if (!row.ok) {
      ++failures;
      continue;
    }
    wer_s.push_back({row.outcome.wer_distance, row.label});
    cer_s.push_back({row.outcome.cer_distance, row.label});
    lcp_s.push_back({row.outcome.lcp_dist, row.label});
  }
  const bool has_pos = std::any_of(wer_s.begin(), wer_s.end(),
                                   [](const Scored& s) { return s.label == 1; });
  const bool has_neg = std::any_of(wer_s.begin(), wer_s.end(),
                                   [](const Scored& s) { return s.label == 0; });
  auc_defined = has_pos && has_neg;
  auc_wer = auc_defined ? auc(wer_s) : 0.0;
  auc_cer = auc_defined ? auc(cer_s) : 0.0;
  auc_lcp = auc_defined ? auc(lcp_s) : 0.0;
  rate_wer = detection_rate(wer_s);
  rate_cer = detection_rate(cer_s);
  rate_lcp = detection_rate(lcp_s);
}

}  // namespace

DetectionReport run_detection_eval(const Backend& backend, const TdConfig& cfg,
                                   const std::vector<ClipRecord>& records,
                                   const std::filesystem::path& base_dir, int workers) {
  DetectionReport report;
  report.backend = backend_name(backend);
  report.k_spec = k_spec_name(cfg.k);
  report.metric = td_metric_name(cfg.metric);
  report.seed = cfg.seed;
  report.workers = workers;

  // Clips that fail to load become failed rows up front; the rest go through
  // the detector, which captures its own per-clip errors.
  std::vector<DetectionInput> inputs;
  std::vector<std::size_t> input_index;  // row slot per input
  report.rows.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    DetectionRecord& row = report.rows[i];
    row.id = records[i].id;
    row.label = records[i].label;
    try {
      inputs.push_back({load_clip(records[i], base_dir), records[i].label});
      input_index.push_back(i);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  }

  const std::vector<DetectionRecord> scored = detect_batch(backend, inputs, cfg, workers);
  for (std::size_t j = 0; j < scored.size(); ++j) report.rows[input_index[j]] = scored[j];

  detection_aggregates(report.rows, report.failures, report.auc_defined, report.auc_wer,
                       report.auc_cer, report.auc_lcp, report.detection_rate_wer,
                       report.detection_rate_cer, report.detection_rate_lcp);
  return report;
}

// ---------------------------------------------------------------------------
// Attack evaluation
// ---------------------------------------------------------------------------

const char* attack_variant_name(AttackVariant v) {
  switch (v) {
    case AttackVariant::kPlain: return "plain";
    case AttackVariant::kSegment: return "segment";
    case AttackVariant::kConcatSplit: return "concat-split";
    case AttackVariant::kConcatSilence: return "concat-silence";
    case AttackVariant::kCombination: return "combination";
  }
  return "unknown";
}

const char* adaptive_mode_name(AdaptiveMode m) {
  switch (m) {
    case AdaptiveMode::kNone: return "none";
    case AdaptiveMode::kQuantize: return "quantize";
    case AdaptiveMode::kDownsample: return "downsample";
    case AdaptiveMode::kSmooth: return "smooth";
  }
  return "unknown";
}

namespace {

void attack_aggregates(const std::vector<AttackRow>& rows, std::size_t& failures,
                       double& success_rate, std::size_t& db_count, double& db_min,
                       double& db_max, double& db_mean) {
  failures = 0;
  std::size_t ok = 0, successes = 0;
  db_count = 0;
  db_min = kInf;
  db_max = -kInf;
  db_mean = 0.0;
  for (const AttackRow& row : rows) {
    if (!row.ok) {
      ++failures;
      continue;
    }
    ++ok;
    if (!row.success) continue;
    ++successes;
    if (!std::isfinite(row.db)) continue;
    ++db_count;
    db_min = std::min(db_min, row.db);
    db_max = std::max(db_max, row.db);
    db_mean += row.db;
  }
  success_rate = ok == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(ok);
  if (db_count > 0) {
    db_mean /= static_cast<double>(db_count);
  } else {
    db_min = db_max = db_mean = 0.0;
  }
}

}  // namespace

AttackReport summarize_attack(std::vector<AttackRow> rows, std::string variant,
                              std::string adaptive, std::uint64_t seed) {
  AttackReport report;
  report.backend = "toy";
  report.variant = std::move(variant);
  report.adaptive = std::move(adaptive);
  report.seed = seed;
  report.rows = std::move(rows);
  attack_aggregates(report.rows, report.failures, report.success_rate, report.db_count,
                    report.db_min, report.db_max, report.db_mean);
  return report;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace {

// JSON numbers rounded to 9 decimals; non-finite values become null
ordered_json jnum(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::round(x * 1e9) / 1e9;
}

ordered_json jratio(const RatioStat& r) {
  if (!r.defined) return nullptr;  // clean baseline: raw aggregate was zero
  return jnum(r.value);
}

ordered_json group_json(const DefenseGroup& g) {
  ordered_json doc;
  doc["count"] = g.count;
  doc["mean_raw_wer"] = jnum(g.mean_raw_wer);
  doc["mean_transformed_wer"] = jnum(g.mean_transformed_wer);
  doc["mean_raw_cer"] = jnum(g.mean_raw_cer);
  doc["mean_transformed_cer"] = jnum(g.mean_transformed_cer);
  doc["ratio_wer"] = jratio(g.ratio_wer);
  doc["ratio_cer"] = jratio(g.ratio_cer);
  return doc;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_num(double x) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out.precision(9);
  out << std::fixed << x;
  return out.str();
}

}  // namespace

nlohmann::ordered_json defense_report_json(const DefenseReport& report) {
  std::size_t failures = 0;
  DefenseGroup benign, adversarial;
  defense_aggregates(report.rows, failures, benign, adversarial);
  if (failures != report.failures || !group_equal(benign, report.benign) ||
      !group_equal(adversarial, report.adversarial)) {
    throw Error("defense report aggregates do not match the rows");
  }

  ordered_json doc;
  doc["kind"] = "defense_eval";
  doc["config"] = {{"version", kToolVersion},
                   {"backend", report.backend},
                   {"transform", report.transform},
                   {"workers", report.workers}};
  doc["clips"] = report.rows.size();
  doc["failures"] = report.failures;
  doc["benign"] = group_json(report.benign);
  doc["adversarial"] = group_json(report.adversarial);
  ordered_json rows = ordered_json::array();
  for (const DefenseRow& row : report.rows) {
    ordered_json r;
    r["id"] = row.id;
    r["label"] = label_to_string(row.label);
    r["ok"] = row.ok;
    if (!row.ok) {
      r["error"] = row.error;
    } else {
      r["raw_transcript"] = row.raw_transcript;
      r["transformed_transcript"] = row.transformed_transcript;
      r["raw_wer"] = jnum(row.raw_wer);
      r["transformed_wer"] = jnum(row.transformed_wer);
      r["raw_cer"] = jnum(row.raw_cer);
      r["transformed_cer"] = jnum(row.transformed_cer);
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc;
}

nlohmann::ordered_json detection_report_json(const DetectionReport& report) {
  std::size_t failures = 0;
  bool auc_defined = false;
  double auc_wer = 0, auc_cer = 0, auc_lcp = 0, rate_wer = 0, rate_cer = 0, rate_lcp = 0;
  detection_aggregates(report.rows, failures, auc_defined, auc_wer, auc_cer, auc_lcp, rate_wer,
                       rate_cer, rate_lcp);
  if (failures != report.failures || auc_defined != report.auc_defined ||
      auc_wer != report.auc_wer || auc_cer != report.auc_cer || auc_lcp != report.auc_lcp ||
      rate_wer != report.detection_rate_wer || rate_cer != report.detection_rate_cer ||
      rate_lcp != report.detection_rate_lcp) {
    throw Error("detection report aggregates do not match the rows");
  }

  ordered_json doc;
  doc["kind"] = "detection_eval";
  doc["config"] = {{"version", kToolVersion},
                   {"backend", report.backend},
                   {"k", report.k_spec},
                   {"metric", report.metric},
                   {"seed", report.seed},
                   {"workers", report.workers}};
  doc["clips"] = report.rows.size();
  doc["failures"] = report.failures;
  if (report.auc_defined) {
    doc["auc"] = {{"wer", jnum(report.auc_wer)},
                  {"cer", jnum(report.auc_cer)},
                  {"lcp", jnum(report.auc_lcp)}};
  } else {
    doc["auc"] = nullptr;
  }
  doc["detection_rate"] = {{"wer", jnum(report.detection_rate_wer)},
                           {"cer", jnum(report.detection_rate_cer)},
                           {"lcp", jnum(report.detection_rate_lcp)}};
  ordered_json rows = ordered_json::array();
  for (const DetectionRecord& row : report.rows) {
    ordered_json r;
    r["id"] = row.id;
    r["label"] = label_to_string(row.label);
    r["ok"] = row.ok;
    if (!row.ok) {
      r["error"] = row.error;
    } else {
      r["k_used"] = jnum(row.outcome.k_used);
      r["prefix_transcript"] = row.outcome.prefix_transcript;
      r["whole_transcript"] = row.outcome.whole_transcript;
      r["wer_distance"] = jnum(row.outcome.wer_distance);
      r["cer_distance"] = jnum(row.outcome.cer_distance);
      r["lcp_distance"] = jnum(row.outcome.lcp_dist);
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc;
}

nlohmann::ordered_json attack_report_json(const AttackReport& report) {
  std::size_t failures = 0, db_count = 0;
  double success_rate = 0, db_min = 0, db_max = 0, db_mean = 0;
  attack_aggregates(report.rows, failures, success_rate, db_count, db_min, db_max, db_mean);
  if (failures != report.failures || success_rate != report.success_rate ||
      db_count != report.db_count || db_min != report.db_min || db_max != report.db_max ||
      db_mean != report.db_mean) {
    throw Error("attack report aggregates do not match the rows");
  }

  ordered_json doc;
  doc["kind"] = "attack_eval";
  doc["config"] = {{"version", kToolVersion},
                   {"backend", report.backend},
                   {"variant", report.variant},
                   {"adaptive", report.adaptive},
                   {"seed", report.seed}};
  for (const auto& [key, value] : report.extra_config) doc["config"][key] = value;
  doc["clips"] = report.rows.size();
  doc["failures"] = report.failures;
  doc["success_rate"] = jnum(report.success_rate);
  doc["db"] = {{"count", report.db_count},
               {"min", jnum(report.db_min)},
               {"max", jnum(report.db_max)},
               {"mean", jnum(report.db_mean)}};
  ordered_json rows = ordered_json::array();
  const bool concat = report.variant == "concat-split" || report.variant == "concat-silence";
  for (const AttackRow& row : report.rows) {
    ordered_json r;
    r["id"] = row.id;
    r["ok"] = row.ok;
    if (!row.ok) {
      r["error"] = row.error;
    } else {
      r["target"] = row.target;
      r["success"] = row.success;
      r["achieved"] = row.achieved;
      r["db"] = jnum(row.db);
      r["c_used"] = jnum(row.c_used);
      r["iterations"] = row.iterations;
      if (concat) {
        r["part1_success"] = row.part1_success;
        r["part2_success"] = row.part2_success;
      }
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc;
}

std::string defense_report_csv(const DefenseReport& report) {
  std::ostringstream out;
  out << "id,label,ok,error,raw_wer,transformed_wer,raw_cer,transformed_cer,"
         "raw_transcript,transformed_transcript\n";
  for (const DefenseRow& row : report.rows) {
    out << csv_field(row.id) << ',' << label_to_string(row.label) << ',' << (row.ok ? 1 : 0)
        << ',' << csv_field(row.error) << ',' << csv_num(row.raw_wer) << ','
        << csv_num(row.transformed_wer) << ',' << csv_num(row.raw_cer) << ','
        << csv_num(row.transformed_cer) << ',' << csv_field(row.raw_transcript) << ','
        << csv_field(row.transformed_transcript) << '\n';
  }
  return out.str();
}

std::string detection_report_csv(const DetectionReport& report) {
  std::ostringstream out;
  out << "id,label,ok,error,k_used,wer_distance,cer_distance,lcp_distance,"
         "prefix_transcript,whole_transcript\n";
  for (const DetectionRecord& row : report.rows) {
    out << csv_field(row.id) << ',' << label_to_string(row.label) << ',' << (row.ok ? 1 : 0)
        << ',' << csv_field(row.error) << ',' << csv_num(row.outcome.k_used) << ','
        << csv_num(row.outcome.wer_distance) << ',' << csv_num(row.outcome.cer_distance) << ','
        << csv_num(row.outcome.lcp_dist) << ',' << csv_field(row.outcome.prefix_transcript)
        << ',' << csv_field(row.outcome.whole_transcript) << '\n';
  }
  return out.str();
}

std::string attack_report_csv(const AttackReport& report) {
  std::ostringstream out;
  out << "id,ok,error,target,success,achieved,db,c_used,iterations\n";
  for (const AttackRow& row : report.rows) {
    out << csv_field(row.id) << ',' << (row.ok ? 1 : 0) << ',' << csv_field(row.error) << ','
        << csv_field(row.target) << ',' << (row.success ? 1 : 0) << ','
        << csv_field(row.achieved) << ',' << csv_num(row.db) << ',' << csv_num(row.c_used)
        << ',' << row.iterations << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  out << text;
  if (!out) throw IoError("short write: " + path.string());
}

void write_json_file(const nlohmann::ordered_json& doc, const std::filesystem::path& path) {
  write_text_file(doc.dump(2) + "\n", path);
}

}  // namespace tda

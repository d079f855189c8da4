// include/tda/eval.hpp
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

#ifndef TDA_EVAL_HPP
#define TDA_EVAL_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tda/attacks.hpp"
#include "tda/backend.hpp"
#include "tda/td_detector.hpp"
#include "tda/transforms.hpp"

namespace tda {

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

// One dataset row. `path` is the WAV location; relative paths are resolved
// against the manifest's directory. Benign rows carry no adversarial target
// and must have a non-empty ground truth.
struct ClipRecord {
  std::string id;
  std::string path;
  std::string ground_truth;
  std::string adversarial_target;  // empty unless label == 1
  int label = 0;                   // 0 benign, 1 adversarial
};

// JSON-lines, one record per line. Malformed lines are reported with their
// line number; duplicate ids are rejected.
std::vector<ClipRecord> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::vector<ClipRecord>& records, const std::filesystem::path& path);

// Reads the record's WAV (relative to base_dir) and stamps the manifest id
// onto the clip.
AudioClip load_clip(const ClipRecord& record, const std::filesystem::path& base_dir);

// ---------------------------------------------------------------------------
// Ranking metrics
// ---------------------------------------------------------------------------

struct Scored {
  double score = 0.0;
  int label = 0;  // 0 benign, 1 adversarial
};

// Mann-Whitney statistic P(adv > benign) + 1/2 P(tie), computed by exact
// integer counting over rank groups. Throws SingleClassError unless both
// labels are present.
double auc(const std::vector<Scored>& scored);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Staircase from (0,0) to (1,1) with one point per distinct score
// (descending threshold sweep); tied scores advance both axes at once, so
// the trapezoid area of the polyline equals auc() exactly.
std::vector<RocPoint> roc_curve(const std::vector<Scored>& scored);

// Trapezoid area under a roc_curve() polyline.
double roc_area(const std::vector<RocPoint>& points);

// "fpr tpr" per line, plot-ready.
std::string roc_points_text(const std::vector<RocPoint>& points);

// Fraction of adversarial records scoring strictly above the threshold;
// 0 when there are no adversarial records.
double detection_rate(const std::vector<Scored>& scored, double threshold = 0.0);

// ---------------------------------------------------------------------------
// Defense evaluation: error rates with and without an input transform
// ---------------------------------------------------------------------------

// transformed-over-raw ratio of mean distances; undefined when the raw
// aggregate is zero (clean baseline)
struct RatioStat {
  bool defined = false;
  double value = 0.0;
};

struct DefenseRow {
  std::string id;
  int label = 0;
  bool ok = false;
  std::string error;
  std::string raw_transcript;          // g(x)
  std::string transformed_transcript;  // g(T(x))
  double raw_wer = 0.0;
  double transformed_wer = 0.0;
  double raw_cer = 0.0;
  double transformed_cer = 0.0;
};

// Aggregates for one label class: means over successful rows, then one
// ratio per distance (mean transformed distance / mean raw distance).
struct DefenseGroup {
  std::size_t count = 0;
  double mean_raw_wer = 0.0;
  double mean_transformed_wer = 0.0;
  double mean_raw_cer = 0.0;
  double mean_transformed_cer = 0.0;
  RatioStat ratio_wer;
  RatioStat ratio_cer;
};

struct DefenseReport {
  std::string backend;
  std::string transform;
  int workers = 1;
  std::vector<DefenseRow> rows;
  std::size_t failures = 0;
  DefenseGroup benign;
  DefenseGroup adversarial;
};

DefenseReport run_defense_eval(const Backend& backend, const Transform& transform,
                               const std::vector<ClipRecord>& records,
                               const std::filesystem::path& base_dir, int workers = 1);

// ---------------------------------------------------------------------------
// Detection evaluation: prefix-consistency scores over a labeled manifest
// ---------------------------------------------------------------------------

struct DetectionReport {
  std::string backend;
  std::string k_spec;  // config echo: "0.5" or "rand(0.2,0.8)"
  std::string metric;  // headline metric name; all three are always computed
  std::uint64_t seed = 0;
  int workers = 1;
  std::vector<DetectionRecord> rows;
  std::size_t failures = 0;
  // AUC per consistency metric; absent when only one label survived
  bool auc_defined = false;
  double auc_wer = 0.0;
  double auc_cer = 0.0;
  double auc_lcp = 0.0;
  // threshold-0 rates over adversarial rows
  double detection_rate_wer = 0.0;
  double detection_rate_cer = 0.0;
  double detection_rate_lcp = 0.0;
};

DetectionReport run_detection_eval(const Backend& backend, const TdConfig& cfg,
                                   const std::vector<ClipRecord>& records,
                                   const std::filesystem::path& base_dir, int workers = 1);

std::string k_spec_name(const KSpec& k);

// ---------------------------------------------------------------------------
// Attack evaluation: drive an attack over a manifest's benign rows
// ---------------------------------------------------------------------------

struct AttackRow {
  std::string id;
  bool ok = false;
  std::string error;
  std::string target;
  bool success = false;
  std::string achieved;
  double db = 0.0;  // -inf sentinel when delta is zero
  double c_used = 0.0;
  std::size_t iterations = 0;
  bool part1_success = false;  // concat variants only
  bool part2_success = false;
};

struct AttackReport {
  std::string backend;  // success is always judged on the toy model itself
  std::string variant;
  std::string adaptive;
  std::uint64_t seed = 0;
  // additional resolved-config entries echoed verbatim into the report
  std::vector<std::pair<std::string, std::string>> extra_config;
  std::vector<AttackRow> rows;
  std::size_t failures = 0;
  double success_rate = 0.0;  // successes / ok rows
  // dB statistics over successful rows with finite distortion
  std::size_t db_count = 0;
  double db_min = 0.0;
  double db_max = 0.0;
  double db_mean = 0.0;
};

const char* attack_variant_name(AttackVariant v);
const char* adaptive_mode_name(AdaptiveMode m);

// Builds the aggregate block (success rate, dB stats, failure count) from
// finished rows.
AttackReport summarize_attack(std::vector<AttackRow> rows, std::string variant,
                              std::string adaptive, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

// Fixed key order, floats rounded to 9 decimals, no timestamps: the same
// inputs produce byte-identical files. Each writer re-derives the aggregates
// from the rows and refuses to emit a report that disagrees with them.
nlohmann::ordered_json defense_report_json(const DefenseReport& report);
nlohmann::ordered_json detection_report_json(const DetectionReport& report);
nlohmann::ordered_json attack_report_json(const AttackReport& report);

std::string defense_report_csv(const DefenseReport& report);
std::string detection_report_csv(const DetectionReport& report);
std::string attack_report_csv(const AttackReport& report);

void write_text_file(const std::string& text, const std::filesystem::path& path);
void write_json_file(const nlohmann::ordered_json& doc, const std::filesystem::path& path);

}  // namespace tda

#endif  // TDA_EVAL_HPP

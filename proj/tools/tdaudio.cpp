// tools/tdaudio.cpp
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

// Single entry point for the whole pipeline:
//   synth     — generate a labeled synthetic corpus (WAVs + manifest)
//   train     — fit the toy recurrent model on a manifest
//   attack    — run targeted optimization attacks over a manifest
//   transform — apply an input defense to every clip in a manifest
//   detect    — prefix-consistency detection over a labeled manifest
//   eval      — error rates with/without a defense transform
//   merge     — combine manifests (paths made absolute, ids must stay unique)
// Every report embeds the fully resolved configuration; --seed pins every
// stochastic choice, so equal invocations produce byte-identical outputs.

#include <cxxabi.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tda/attacks.hpp"
#include "tda/backend.hpp"
#include "tda/errors.hpp"
#include "tda/eval.hpp"
#include "tda/parallel.hpp"
#include "tda/random.hpp"
#include "tda/td_detector.hpp"
#include "tda/text_metrics.hpp"
#include "tda/toy_asr.hpp"
#include "tda/transforms.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Shared flag groups
// ---------------------------------------------------------------------------

struct BackendFlags {
  std::string kind = "toy";
  std::string model;                     // toy
  std::string command;                   // command
  std::vector<std::string> command_args; // command; {} -> temp WAV path
  std::string url;                       // http
  int timeout_seconds = 30;              // http
  std::string table;                     // scripted: JSON object id -> transcript
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags) {
  cmd->add_option("--backend", flags.kind, "toy | command | http | scripted")
      ->check(CLI::IsMember({"toy", "command", "http", "scripted"}));
  cmd->add_option("--model", flags.model, "toy model artifact (backend=toy)");
  cmd->add_option("--cmd", flags.command, "transcriber executable (backend=command)");
  cmd->add_option("--cmd-arg", flags.command_args,
                  "argument for --cmd; {} expands to the WAV path (default: one {})");
  cmd->add_option("--url", flags.url, "transcription endpoint (backend=http)");
  cmd->add_option("--timeout", flags.timeout_seconds, "http timeout in seconds");
  cmd->add_option("--table", flags.table, "JSON id->transcript map (backend=scripted)");
}

tda::Backend make_backend(const BackendFlags& flags) {
  if (flags.kind == "toy") {
    if (flags.model.empty()) throw tda::ConfigError("backend=toy requires --model");
    auto model = std::make_shared<tda::ToyRnn>(tda::ToyRnn::load(flags.model));
    return tda::ToyBackend{std::move(model)};
  }
  if (flags.kind == "command") {
    if (flags.command.empty()) throw tda::ConfigError("backend=command requires --cmd");
    tda::CommandBackend b;
    b.program = flags.command;
    if (!flags.command_args.empty()) b.args = flags.command_args;
    return b;
  }
  if (flags.kind == "http") {
    if (flags.url.empty()) throw tda::ConfigError("backend=http requires --url");
    tda::HttpBackend b;
    b.url = flags.url;
    b.timeout_seconds = flags.timeout_seconds;
    return b;
  }
  if (flags.table.empty()) throw tda::ConfigError("backend=scripted requires --table");
  std::ifstream in(flags.table);
  if (!in) throw tda::IoError("cannot open table: " + flags.table);
  const nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw tda::ConfigError("scripted table must be a JSON object: " + flags.table);
  }
  tda::ScriptedBackend b;
  for (const auto& [id, text] : doc.items()) {
    if (!text.is_string()) throw tda::ConfigError("table entry \"" + id + "\" is not a string");
    b.table[id] = text.get<std::string>();
  }
  return b;
}

struct TransformFlags {
  std::string name = "identity";  // identity|quantize|smooth-avg|smooth-med|downsample|autoencoder
  int q = 256;
  std::size_t half_width = 2;
  int factor = 2;
  std::size_t rank = 32;
  std::string ae_model;      // load a fitted autoencoder
  std::string fit_manifest;  // or fit one on this corpus
  std::string save_ae;       // optional artifact for a freshly fitted autoencoder
};

void add_transform_flags(CLI::App* cmd, TransformFlags& flags) {
  cmd->add_option("--transform", flags.name,
                  "identity | quantize | smooth-avg | smooth-med | downsample | autoencoder")
      ->check(CLI::IsMember(
          {"identity", "quantize", "smooth-avg", "smooth-med", "downsample", "autoencoder"}));
  cmd->add_option("--q", flags.q, "quantization step");
  cmd->add_option("--K", flags.half_width, "smoothing half width (window 2K-1)");
  cmd->add_option("--factor", flags.factor, "downsampling factor");
  cmd->add_option("--rank", flags.rank, "autoencoder basis rank");
  cmd->add_option("--ae-model", flags.ae_model, "fitted autoencoder artifact to load");
  cmd->add_option("--fit-manifest", flags.fit_manifest, "corpus to fit the autoencoder on");
  cmd->add_option("--save-ae", flags.save_ae, "where to store a freshly fitted autoencoder");
}

std::vector<tda::AudioClip> load_manifest_clips(const fs::path& manifest_path,
                                                bool benign_only = false) {
  const std::vector<tda::ClipRecord> records = tda::load_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::vector<tda::AudioClip> clips;
  for (const tda::ClipRecord& rec : records) {
    if (benign_only && rec.label != 0) continue;
    clips.push_back(tda::load_clip(rec, base));
  }
  return clips;
}

tda::Transform make_transform(const TransformFlags& flags) {
  if (flags.name == "identity") return tda::IdentityTransform{};
  if (flags.name == "quantize") return tda::QuantizeTransform{flags.q};
  if (flags.name == "smooth-avg") {
    return tda::SmoothTransform{flags.half_width, tda::SmoothKind::kAverage};
  }
  if (flags.name == "smooth-med") {
    return tda::SmoothTransform{flags.half_width, tda::SmoothKind::kMedian};
  }
  if (flags.name == "downsample") return tda::DownsampleTransform{flags.factor};

  std::shared_ptr<const tda::PcaAutoencoder> model;
  if (!flags.ae_model.empty()) {
    model = std::make_shared<tda::PcaAutoencoder>(tda::PcaAutoencoder::load(flags.ae_model));
  } else if (!flags.fit_manifest.empty()) {
    const std::vector<tda::AudioClip> corpus = load_manifest_clips(flags.fit_manifest, true);
    auto fitted = std::make_shared<tda::PcaAutoencoder>(
        tda::PcaAutoencoder::fit(corpus, flags.rank));
    if (!flags.save_ae.empty()) fitted->save(flags.save_ae);
    model = std::move(fitted);
  } else {
    throw tda::ConfigError("transform=autoencoder requires --ae-model or --fit-manifest");
  }
  return tda::PcaTransform{std::move(model)};
}

std::vector<double> parse_schedule(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw tda::ConfigError("empty entry in --c-schedule");
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw tda::ConfigError("bad --c-schedule entry: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw tda::ConfigError("empty --c-schedule");
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  int min_words = 3, max_words = 8, min_chars = 2, max_chars = 5;
  std::string prefix = "clip";
};

int cmd_synth(const SynthArgs& args) {
  tda::CorpusConfig cfg;
  cfg.count = args.count;
  cfg.min_words = args.min_words;
  cfg.max_words = args.max_words;
  cfg.min_chars = args.min_chars;
  cfg.max_chars = args.max_chars;
  cfg.seed = args.seed;
  cfg.id_prefix = args.prefix;

  const std::vector<tda::LabeledClip> corpus = tda::make_corpus(cfg);
  fs::create_directories(args.out_dir);
  std::vector<tda::ClipRecord> records;
  for (const tda::LabeledClip& item : corpus) {
    const std::string file = item.clip.id + ".wav";
    tda::write_wav(item.clip, fs::path(args.out_dir) / file);
    records.push_back({item.clip.id, file, item.text, "", 0});
  }
  tda::save_manifest(records, fs::path(args.out_dir) / "manifest.jsonl");
  std::fprintf(stderr, "synth: %zu clips -> %s\n", corpus.size(), args.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string manifest;
  std::string out_model;
  std::string report;
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  bool verbose = false;
};

int cmd_train(const TrainArgs& args) {
  const std::vector<tda::ClipRecord> records = tda::load_manifest(args.manifest);
  const fs::path base = fs::path(args.manifest).parent_path();
  std::vector<tda::LabeledClip> corpus;
  for (const tda::ClipRecord& rec : records) {
    if (rec.label != 0) continue;  // train on clean audio only
    corpus.push_back({tda::load_clip(rec, base), rec.ground_truth});
  }
  if (corpus.empty()) throw tda::ConfigError("train: manifest has no benign rows");

  tda::TrainConfig cfg;
  cfg.epochs = args.epochs;
  cfg.learning_rate = args.learning_rate;
  cfg.batch_size = args.batch_size;
  cfg.seed = args.seed;
  cfg.verbose = args.verbose;

  std::vector<double> losses;
  const tda::ToyRnn model = tda::train_toy_rnn(corpus, cfg, &losses);
  model.save(args.out_model);

  if (!args.report.empty()) {
    ordered_json doc;
    doc["kind"] = "train";
    doc["config"] = {{"version", tda::kToolVersion},
                     {"clips", corpus.size()},
                     {"epochs", cfg.epochs},
                     {"learning_rate", cfg.learning_rate},
                     {"batch_size", cfg.batch_size},
                     {"seed", cfg.seed}};
    ordered_json arr = ordered_json::array();
    for (double l : losses) arr.push_back(std::round(l * 1e9) / 1e9);
    doc["epoch_losses"] = std::move(arr);
    tda::write_json_file(doc, args.report);
  }
  std::fprintf(stderr, "train: %zu clips, %zu epochs -> %s\n", corpus.size(), args.epochs,
               args.out_model.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// attack
// ---------------------------------------------------------------------------

struct AttackArgs {
  std::string manifest;
  std::string model;
  std::string out_dir;
  std::string target;       // fixed target; empty = random per clip
  int target_words = 2;     // random-target word count
  std::string variant = "plain";
  std::string adaptive = "none";
  int q = 256;
  int factor = 2;
  std::string smooth_kind = "avg";
  std::size_t half_width = 2;
  double k = 0.5;
  std::vector<double> k_attack;
  std::vector<double> k_attack_rand;  // lo hi
  std::string c_schedule = "0.1,1,10,100";
  std::size_t iters = 1000;
  double step = 0.01;
  std::size_t refine = 150;
  std::uint64_t seed = 0;
  int workers = 1;
};

std::string random_target(const std::string& clip_id, std::uint64_t seed, int words) {
  tda::Rng rng(tda::mix_seed(seed, clip_id + ":target"));
  std::string text;
  for (int w = 0; w < words; ++w) {
    if (w > 0) text.push_back(' ');
    const int len = rng.uniform_int(2, 5);
    for (int i = 0; i < len; ++i) {
      text.push_back(static_cast<char>('a' + rng.uniform_int(0, 9)));
    }
  }
  return text;
}

int cmd_attack(const AttackArgs& args) {
  const std::vector<tda::ClipRecord> all_records = tda::load_manifest(args.manifest);
  const fs::path base = fs::path(args.manifest).parent_path();
  std::vector<tda::ClipRecord> records;
  for (const tda::ClipRecord& rec : all_records) {
    if (rec.label == 0) records.push_back(rec);  // attack starts from clean audio
  }
  if (records.empty()) throw tda::ConfigError("attack: manifest has no benign rows");

  const auto model = std::make_shared<tda::ToyRnn>(tda::ToyRnn::load(args.model));

  tda::AttackConfig proto;
  proto.c_schedule = parse_schedule(args.c_schedule);
  proto.iters_per_c = args.iters;
  proto.step_size = args.step;
  proto.refine_iters = args.refine;
  proto.quantize_q = args.q;
  proto.downsample_factor = args.factor;
  proto.smooth_kind =
      args.smooth_kind == "med" ? tda::SmoothKind::kMedian : tda::SmoothKind::kAverage;
  proto.smooth_half_width = args.half_width;
  proto.variant_k = args.k;
  proto.seed = args.seed;
  if (args.variant == "plain") proto.variant = tda::AttackVariant::kPlain;
  else if (args.variant == "segment") proto.variant = tda::AttackVariant::kSegment;
  else if (args.variant == "concat-split") proto.variant = tda::AttackVariant::kConcatSplit;
  else if (args.variant == "concat-silence") proto.variant = tda::AttackVariant::kConcatSilence;
  else if (args.variant == "combination") proto.variant = tda::AttackVariant::kCombination;
  else throw tda::ConfigError("unknown --variant: " + args.variant);
  if (args.adaptive == "none") proto.adaptive = tda::AdaptiveMode::kNone;
  else if (args.adaptive == "quantize") proto.adaptive = tda::AdaptiveMode::kQuantize;
  else if (args.adaptive == "downsample") proto.adaptive = tda::AdaptiveMode::kDownsample;
  else if (args.adaptive == "smooth") proto.adaptive = tda::AdaptiveMode::kSmooth;
  else throw tda::ConfigError("unknown --adaptive: " + args.adaptive);
  for (double kv : args.k_attack) proto.k_attack.emplace_back(kv);
  if (!args.k_attack_rand.empty()) {
    if (args.k_attack_rand.size() != 2) {
      throw tda::ConfigError("--k-attack-rand needs exactly two values");
    }
    proto.k_attack.emplace_back(tda::RandK{args.k_attack_rand[0], args.k_attack_rand[1]});
  }
  if (proto.variant == tda::AttackVariant::kCombination && proto.k_attack.empty()) {
    throw tda::ConfigError("variant=combination requires --k-attack and/or --k-attack-rand");
  }

  fs::create_directories(args.out_dir);

  struct Slot {
    tda::AttackRow row;
    tda::ClipRecord out_record;
    bool keep = false;
  };
  std::vector<Slot> slots(records.size());

  tda::parallel_for(records.size(), args.workers, [&](std::size_t i) {
    const tda::ClipRecord& rec = records[i];
    Slot& slot = slots[i];
    slot.row.id = rec.id;
    try {
      const tda::AudioClip clip = tda::load_clip(rec, base);
      tda::AttackConfig cfg = proto;
      cfg.target = args.target.empty() ? random_target(rec.id, args.seed, args.target_words)
                                       : args.target;
      const tda::AttackResult res = tda::run_attack(*model, clip, cfg);

      slot.row.ok = true;
      slot.row.target = tda::normalize_text(cfg.target);
      slot.row.success = res.success;
      slot.row.achieved = res.achieved;
      slot.row.db = res.db;
      slot.row.c_used = res.c_used;
      slot.row.iterations = res.iterations;
      slot.row.part1_success = res.part1_success;
      slot.row.part2_success = res.part2_success;

      const std::string adv_id = rec.id + "-adv";
      const std::string file = adv_id + ".wav";
      tda::AudioClip adv = tda::apply_delta(clip, res.delta);
      adv.id = adv_id;
      tda::write_wav(adv, fs::path(args.out_dir) / file);
      slot.out_record = {adv_id, file, rec.ground_truth, slot.row.target, 1};
      slot.keep = true;
    } catch (const std::exception& e) {
      slot.row.ok = false;
      slot.row.error = e.what();
    }
  });

  std::vector<tda::AttackRow> rows;
  std::vector<tda::ClipRecord> out_records;
  for (Slot& slot : slots) {
    rows.push_back(std::move(slot.row));
    if (slot.keep) out_records.push_back(std::move(slot.out_record));
  }

  tda::AttackReport report =
      tda::summarize_attack(std::move(rows), args.variant, args.adaptive, args.seed);
  report.extra_config = {
      {"target", args.target.empty()
                     ? "random-" + std::to_string(args.target_words) + "-words"
                     : tda::normalize_text(args.target)},
      {"c_schedule", args.c_schedule},
      {"iters_per_c", std::to_string(args.iters)},
      {"step_size", fmt_double(args.step)},
      {"refine_iters", std::to_string(args.refine)},
      {"workers", std::to_string(args.workers)},
  };
  if (proto.adaptive == tda::AdaptiveMode::kQuantize) {
    report.extra_config.emplace_back("q", std::to_string(args.q));
  }
  if (proto.adaptive == tda::AdaptiveMode::kDownsample) {
    report.extra_config.emplace_back("factor", std::to_string(args.factor));
  }
  if (proto.adaptive == tda::AdaptiveMode::kSmooth) {
    report.extra_config.emplace_back("smooth_kind", args.smooth_kind);
    report.extra_config.emplace_back("K", std::to_string(args.half_width));
  }
  if (proto.variant == tda::AttackVariant::kSegment ||
      proto.variant == tda::AttackVariant::kConcatSplit ||
      proto.variant == tda::AttackVariant::kConcatSilence) {
    report.extra_config.emplace_back("k", fmt_double(args.k));
  }
  if (proto.variant == tda::AttackVariant::kCombination) {
    std::string spec;
    for (const tda::KSpec& kspec : proto.k_attack) {
      if (!spec.empty()) spec.push_back(';');
      spec += tda::k_spec_name(kspec);
    }
    report.extra_config.emplace_back("k_attack", spec);
  }

  tda::save_manifest(out_records, fs::path(args.out_dir) / "manifest.jsonl");
  tda::write_json_file(tda::attack_report_json(report), fs::path(args.out_dir) / "report.json");
  tda::write_text_file(tda::attack_report_csv(report), fs::path(args.out_dir) / "report.csv");
  std::fprintf(stderr, "attack: %zu clips, success rate %.3f -> %s\n", records.size(),
               report.success_rate, args.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// transform
// ---------------------------------------------------------------------------

struct TransformArgs {
  std::string manifest;
  std::string out_dir;
  TransformFlags transform;
  int workers = 1;
};

int cmd_transform(const TransformArgs& args) {
  const std::vector<tda::ClipRecord> records = tda::load_manifest(args.manifest);
  const fs::path base = fs::path(args.manifest).parent_path();
  const tda::Transform transform = make_transform(args.transform);

  fs::create_directories(args.out_dir);
  std::vector<tda::ClipRecord> out_records(records.size());
  tda::parallel_for(records.size(), args.workers, [&](std::size_t i) {
    const tda::ClipRecord& rec = records[i];
    const tda::AudioClip transformed =
        tda::apply_transform(transform, tda::load_clip(rec, base));
    const std::string file = rec.id + ".wav";
    tda::write_wav(transformed, fs::path(args.out_dir) / file);
    tda::ClipRecord out = rec;
    out.path = file;
    out_records[i] = std::move(out);
  });
  tda::save_manifest(out_records, fs::path(args.out_dir) / "manifest.jsonl");
  std::fprintf(stderr, "transform %s: %zu clips -> %s\n",
               tda::transform_name(transform).c_str(), records.size(), args.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectArgs {
  std::string manifest;
  BackendFlags backend;
  double k = 0.5;
  std::vector<double> k_rand;  // lo hi
  std::string metric = "wer";
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
  std::string csv;
  std::string roc;
};

int cmd_detect(const DetectArgs& args) {
  const std::vector<tda::ClipRecord> records = tda::load_manifest(args.manifest);
  const tda::Backend backend = make_backend(args.backend);

  tda::TdConfig cfg;
  if (!args.k_rand.empty()) {
    if (args.k_rand.size() != 2) throw tda::ConfigError("--k-rand needs exactly two values");
    cfg.k = tda::RandK{args.k_rand[0], args.k_rand[1]};
  } else {
    cfg.k = args.k;
  }
  cfg.metric = tda::td_metric_from_name(args.metric);
  cfg.seed = args.seed;

  const tda::DetectionReport report = tda::run_detection_eval(
      backend, cfg, records, fs::path(args.manifest).parent_path(), args.workers);
  tda::write_json_file(tda::detection_report_json(report), args.out);
  if (!args.csv.empty()) tda::write_text_file(tda::detection_report_csv(report), args.csv);
  if (!args.roc.empty()) {
    std::vector<tda::Scored> scored;
    for (const tda::DetectionRecord& row : report.rows) {
      if (row.ok) scored.push_back({row.outcome.distance(cfg.metric), row.label});
    }
    tda::write_text_file(tda::roc_points_text(tda::roc_curve(scored)), args.roc);
  }
  if (report.auc_defined) {
    std::fprintf(stderr, "detect k=%s: auc wer %.3f cer %.3f lcp %.3f -> %s\n",
                 report.k_spec.c_str(), report.auc_wer, report.auc_cer, report.auc_lcp,
                 args.out.c_str());
  } else {
    std::fprintf(stderr, "detect k=%s: single-class manifest, detection rate (wer) %.3f -> %s\n",
                 report.k_spec.c_str(), report.detection_rate_wer, args.out.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string manifest;
  BackendFlags backend;
  TransformFlags transform;
  int workers = 1;
  std::string out;
  std::string csv;
};

int cmd_eval(const EvalArgs& args) {
  const std::vector<tda::ClipRecord> records = tda::load_manifest(args.manifest);
  const tda::Backend backend = make_backend(args.backend);
  const tda::Transform transform = make_transform(args.transform);

  const tda::DefenseReport report = tda::run_defense_eval(
      backend, transform, records, fs::path(args.manifest).parent_path(), args.workers);
  tda::write_json_file(tda::defense_report_json(report), args.out);
  if (!args.csv.empty()) tda::write_text_file(tda::defense_report_csv(report), args.csv);
  std::fprintf(stderr, "eval %s: %zu clips, %zu failures -> %s\n", report.transform.c_str(),
               report.rows.size(), report.failures, args.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// merge
// ---------------------------------------------------------------------------

struct MergeArgs {
  std::vector<std::string> inputs;
  std::string out;
};

int cmd_merge(const MergeArgs& args) {
  std::vector<tda::ClipRecord> merged;
  for (const std::string& input : args.inputs) {
    const fs::path base = fs::absolute(fs::path(input)).parent_path();
    for (tda::ClipRecord rec : tda::load_manifest(input)) {
      fs::path p(rec.path);
      rec.path = (p.is_relative() ? base / p : p).lexically_normal().string();
      merged.push_back(std::move(rec));
    }
  }
  tda::save_manifest(merged, args.out);  // rejects duplicate ids
  std::fprintf(stderr, "merge: %zu records -> %s\n", merged.size(), args.out.c_str());
  return 0;
}

std::string demangled(const std::type_info& info) {
  int status = 0;
  char* name = abi::__cxa_demangle(info.name(), nullptr, nullptr, &status);
  std::string out = (status == 0 && name) ? name : info.name();
  std::free(name);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech-to-text attack, defense, and consistency-detection pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tda::kToolVersion);

  SynthArgs synth;
  CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
  c_synth->add_option("--out", synth.out_dir, "output directory")->required();
  c_synth->add_option("--count", synth.count, "number of clips")->required();
  c_synth->add_option("--seed", synth.seed, "corpus seed");
  c_synth->add_option("--min-words", synth.min_words);
  c_synth->add_option("--max-words", synth.max_words);
  c_synth->add_option("--min-chars", synth.min_chars);
  c_synth->add_option("--max-chars", synth.max_chars);
  c_synth->add_option("--prefix", synth.prefix, "clip id prefix");

  TrainArgs train;
  CLI::App* c_train = app.add_subcommand("train", "train the toy recurrent transcriber");
  c_train->add_option("--manifest", train.manifest)->required();
  c_train->add_option("--out", train.out_model, "model artifact path")->required();
  c_train->add_option("--report", train.report, "training report JSON path");
  c_train->add_option("--epochs", train.epochs);
  c_train->add_option("--lr", train.learning_rate);
  c_train->add_option("--batch", train.batch_size);
  c_train->add_option("--seed", train.seed);
  c_train->add_flag("--verbose", train.verbose, "one line per epoch on stderr");

  AttackArgs attack;
  CLI::App* c_attack = app.add_subcommand("attack", "targeted optimization attacks");
  c_attack->add_option("--manifest", attack.manifest)->required();
  c_attack->add_option("--model", attack.model, "toy model artifact")->required();
  c_attack->add_option("--out", attack.out_dir, "output directory")->required();
  c_attack->add_option("--target", attack.target, "fixed target text (default: random per clip)");
  c_attack->add_option("--target-words", attack.target_words, "random-target word count");
  c_attack->add_option("--variant", attack.variant,
                       "plain | segment | concat-split | concat-silence | combination");
  c_attack->add_option("--adaptive", attack.adaptive, "none | quantize | downsample | smooth");
  c_attack->add_option("--q", attack.q, "quantization step (adaptive=quantize)");
  c_attack->add_option("--factor", attack.factor, "downsampling factor (adaptive=downsample)");
  c_attack->add_option("--smooth-kind", attack.smooth_kind, "avg | med (adaptive=smooth)");
  c_attack->add_option("--K", attack.half_width, "smoothing half width (adaptive=smooth)");
  c_attack->add_option("--k", attack.k, "split fraction (segment/concat variants)");
  c_attack->add_option("--k-attack", attack.k_attack, "combination prefix fraction(s)");
  c_attack->add_option("--k-attack-rand", attack.k_attack_rand, "combination random k: lo hi")
      ->expected(2);
  c_attack->add_option("--c-schedule", attack.c_schedule, "comma-separated ascending c values");
  c_attack->add_option("--iters", attack.iters, "iterations per c value");
  c_attack->add_option("--step", attack.step, "optimizer step size");
  c_attack->add_option("--refine", attack.refine, "post-success refinement iterations");
  c_attack->add_option("--seed", attack.seed);
  c_attack->add_option("--workers", attack.workers);

  TransformArgs transform;
  CLI::App* c_transform = app.add_subcommand("transform", "apply an input defense to a corpus");
  c_transform->add_option("--manifest", transform.manifest)->required();
  c_transform->add_option("--out", transform.out_dir, "output directory")->required();
  add_transform_flags(c_transform, transform.transform);
  c_transform->add_option("--workers", transform.workers);

  DetectArgs detect;
  CLI::App* c_detect = app.add_subcommand("detect", "prefix-consistency detection");
  c_detect->add_option("--manifest", detect.manifest)->required();
  add_backend_flags(c_detect, detect.backend);
  c_detect->add_option("--k", detect.k, "prefix fraction");
  c_detect->add_option("--k-rand", detect.k_rand, "random prefix fraction: lo hi")->expected(2);
  c_detect->add_option("--metric", detect.metric, "headline metric: wer | cer | lcp");
  c_detect->add_option("--seed", detect.seed);
  c_detect->add_option("--workers", detect.workers);
  c_detect->add_option("--out", detect.out, "report JSON path")->required();
  c_detect->add_option("--csv", detect.csv, "per-clip CSV path");
  c_detect->add_option("--roc", detect.roc, "ROC points path (headline metric)");

  EvalArgs eval;
  CLI::App* c_eval = app.add_subcommand("eval", "error rates with/without a defense");
  c_eval->add_option("--manifest", eval.manifest)->required();
  add_backend_flags(c_eval, eval.backend);
  add_transform_flags(c_eval, eval.transform);
  c_eval->add_option("--workers", eval.workers);
  c_eval->add_option("--out", eval.out, "report JSON path")->required();
  c_eval->add_option("--csv", eval.csv, "per-clip CSV path");

  MergeArgs merge;
  CLI::App* c_merge = app.add_subcommand("merge", "combine manifests with absolute paths");
  c_merge->add_option("--out", merge.out, "output manifest path")->required();
  c_merge->add_option("inputs", merge.inputs, "input manifests")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ordered_json err;
    err["error"] = {{"type", "UsageError"}, {"message", e.what()}};
    std::printf("%s\n", err.dump().c_str());
    return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
  }

  try {
    if (c_synth->parsed()) return cmd_synth(synth);
    if (c_train->parsed()) return cmd_train(train);
    if (c_attack->parsed()) return cmd_attack(attack);
    if (c_transform->parsed()) return cmd_transform(transform);
    if (c_detect->parsed()) return cmd_detect(detect);
    if (c_eval->parsed()) return cmd_eval(eval);
    if (c_merge->parsed()) return cmd_merge(merge);
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"] = {{"type", demangled(typeid(e))}, {"message", e.what()}};
    std::printf("%s\n", err.dump().c_str());
    return 1;
  }
  return 0;
}

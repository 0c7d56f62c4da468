#pragma once

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "wdist/core/config.hpp"
#include "wdist/data/generate.hpp"
#include "wdist/data/io.hpp"
#include "wdist/data/split.hpp"
#include "wdist/ml/metrics.hpp"
#include "wdist/ml/model.hpp"
#include "wdist/ml/ranking.hpp"
#include "wdist/validation/propositions.hpp"

namespace wdist::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kManifestName = "manifest.json";

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitGeneration = 3,
  kExitDivergence = 4,
  kExitLayout = 5,
  kExitViolations = 6,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter:
    case ErrorKind::dimension: return kExitUsage;
    case ErrorKind::generation: return kExitGeneration;
    case ErrorKind::divergence: return kExitDivergence;
    case ErrorKind::compatibility: return kExitLayout;
    default: return kExitFailure;
  }
}

/// "error[<code>:<kind>] message" on one line.
inline void report_error(std::ostream& err, int code, const std::string& kind, std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  err << "error[" << code << ':' << kind << "] " << message << '\n';
}

namespace detail {

namespace fs = std::filesystem;

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Every option of a subcommand with its effective value.
inline nlohmann::json flag_echo(const CLI::App& app) {
  nlohmann::json flags = nlohmann::json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name.empty()) continue;
    const auto& results = opt->results();
    if (results.empty()) {
      flags[name] = opt->get_default_str();
    } else if (results.size() == 1) {
      flags[name] = results.front();
    } else {
      flags[name] = results;
    }
  }
  return flags;
}

/// Run record written next to the outputs. Outputs name it by file name, so
/// everything except the manifest itself is independent of time and workers.
class Manifest {
 public:
  Manifest(std::string command, nlohmann::json flags)
      : start_(std::chrono::system_clock::now()), steady_(std::chrono::steady_clock::now()) {
    j_ = {{"command", std::move(command)},
          {"flags", std::move(flags)},
          {"tool_version", kToolVersion},
          {"layout_version", kLayoutVersion},
          {"rng", std::string(SeededRandomSource::algorithm)},
          {"max_qubits", max_qubits()},
          {"inputs", nlohmann::json::array()},
          {"outputs", nlohmann::json::array()}};
  }

  void set(const std::string& key, nlohmann::json value) { j_[key] = std::move(value); }
  void input(const std::string& path) { j_["inputs"].push_back(path); }
  void output(const std::string& path) { j_["outputs"].push_back(path); }

  void write(const std::string& path) {
    j_["started_at"] = utc_timestamp(start_);
    j_["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - steady_).count();
    write_json_file(path, j_);
  }

 private:
  std::chrono::system_clock::time_point start_;
  std::chrono::steady_clock::time_point steady_;
  nlohmann::json j_;
};

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

/// A dataset path is either a CSV file or a gen-data directory, in which case
/// `member` (train.csv, val.csv or test.csv) is read from it.
inline std::string resolve_dataset(const std::string& path, const std::string& member) {
  if (fs::is_directory(path)) return (fs::path(path) / member).string();
  return path;
}

inline nlohmann::json parse_hyperparams(const std::string& text) {
  if (text.empty()) return nullptr;
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError(std::string("--hyperparams is not valid JSON: ") + e.what());
  }
}

inline nlohmann::json metrics_json(const ml::Metrics& m, std::size_t rows) {
  return {{"mse", m.mse}, {"mae", m.mae}, {"r2", m.r2}, {"n_rows", rows}};
}

inline void write_model_file(const ml::RegressionModel& m, const std::string& path, const std::string& manifest) {
  nlohmann::json j = ml::to_json(m);
  j["manifest"] = manifest;
  write_json_file(path, j);
}

inline std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

inline std::string file_name(const std::string& path) { return fs::path(path).filename().string(); }

}  // namespace detail

// ------------------------------------------------------------------ commands

struct GenDataOptions {
  GenerationSpec spec{2, PairKind::random_pure, 14000, 10, 0};
  std::string kind = "random_pure";
  SplitFractions fractions;
  std::string out;
  int workers = 1;
};

inline int cmd_gen_data(const GenDataOptions& o, const nlohmann::json& flags, std::ostream& out) {
  GenerationSpec spec = o.spec;
  spec.kind = pair_kind_from_string(o.kind);
  detail::Manifest manifest("gen-data", flags);
  manifest.set("seed", spec.seed);
  manifest.set("spec", to_json(spec));

  LabeledDataset ds = generate_dataset(spec, o.workers);
  ds.manifest = kManifestName;
  auto parts = split_dataset(ds, o.fractions, spec.seed);
  detail::ensure_directory(o.out);
  nlohmann::json sizes = nlohmann::json::object();
  for (auto& part : parts) {
    const std::string name = std::string(to_string(part.split)) + ".csv";
    const std::string path = detail::path_in(o.out, name);
    write_dataset(part, path);
    manifest.output(name);
    manifest.output(detail::file_name(sidecar_path(path)));
    sizes[to_string(part.split)] = part.size();
  }
  manifest.set("split_sizes", sizes);
  manifest.write(detail::path_in(o.out, kManifestName));
  out << "gen-data: " << parts[0].size() << '/' << parts[1].size() << '/' << parts[2].size()
      << " train/val/test rows in " << o.out << '\n';
  return kExitOk;
}

struct TrainOptions {
  std::string model;
  std::string data;
  std::string val;
  std::string out;
  std::string hyperparams;
  int workers = 1;
};

/// Fits a model and writes <out>, <out>.metrics.json and <out>.manifest.json.
inline int cmd_train(const TrainOptions& o, const nlohmann::json& flags, std::ostream& out) {
  const ml::ModelKind kind = ml::model_kind_from_string(o.model);
  const nlohmann::json hyper = detail::parse_hyperparams(o.hyperparams);
  const std::string manifest_path = o.out + ".manifest.json";
  detail::Manifest manifest("train", flags);

  const std::string train_path = detail::resolve_dataset(o.data, "train.csv");
  std::string val_path = o.val;
  if (val_path.empty() && detail::fs::is_directory(o.data)) {
    const std::string candidate = detail::path_in(o.data, "val.csv");
    if (detail::fs::exists(candidate)) val_path = candidate;
  }
  const LabeledDataset train = read_dataset(train_path);
  manifest.input(train_path);
  std::optional<LabeledDataset> val;
  if (!val_path.empty()) {
    val = read_dataset(val_path);
    manifest.input(val_path);
  }
  if (train.spec) manifest.set("seed", train.spec->seed);

  const ml::RegressionModel model = ml::fit_model(kind, train, hyper, val ? &*val : nullptr, o.workers);

  nlohmann::json splits = nlohmann::json::object();
  splits["train"] = detail::metrics_json(ml::evaluate(ml::label_vector(train), ml::predict(model, train)), train.size());
  if (val) splits["val"] = detail::metrics_json(ml::evaluate(ml::label_vector(*val), ml::predict(model, *val)), val->size());
  const nlohmann::json metrics = {{"model", to_string(kind)},
                                  {"layout_hash", hex64(model.layout_hash)},
                                  {"splits", splits},
                                  {"manifest", detail::file_name(manifest_path)}};

  const std::string parent = detail::fs::path(o.out).parent_path().string();
  if (!parent.empty()) detail::ensure_directory(parent);
  detail::write_model_file(model, o.out, detail::file_name(manifest_path));
  write_json_file(o.out + ".metrics.json", metrics);
  manifest.output(detail::file_name(o.out));
  manifest.output(detail::file_name(o.out + ".metrics.json"));
  manifest.set("hyperparams", model.hyperparams);
  manifest.set("model_info", model.info);
  if (model.info.contains("l1")) manifest.set("selected_l1", model.info["l1"]);
  manifest.write(manifest_path);

  out << "train: " << to_string(kind) << " train r2=" << format_double(splits["train"]["r2"].get<double>());
  if (val) out << " val r2=" << format_double(splits["val"]["r2"].get<double>());
  out << '\n';
  return kExitOk;
}

struct EvalOptions {
  std::string model;
  std::string data;
  std::string out;
};

/// Metrics and a predictions-vs-truth CSV for one dataset (test.csv of a
/// gen-data directory by default).
inline int cmd_eval(const EvalOptions& o, const nlohmann::json& flags, std::ostream& out) {
  detail::Manifest manifest("eval", flags);
  const ml::RegressionModel model = ml::load_model(o.model);
  const std::string data_path = detail::resolve_dataset(o.data, "test.csv");
  const LabeledDataset ds = read_dataset(data_path);
  manifest.input(o.model);
  manifest.input(data_path);
  const ml::Vector pred = ml::predict(model, ds);
  const ml::Metrics m = ml::evaluate(ml::label_vector(ds), pred);

  detail::ensure_directory(o.out);
  nlohmann::json metrics = detail::metrics_json(m, ds.size());
  metrics["model"] = to_string(model.kind);
  metrics["split"] = to_string(ds.split);
  metrics["manifest"] = kManifestName;
  write_json_file(detail::path_in(o.out, "metrics.json"), metrics);

  std::string csv = "row,label,prediction,bin\n";
  for (std::size_t i = 0; i < ds.size(); ++i)
    csv += std::to_string(i) + ',' + format_double(ds.rows[i].label) + ',' +
           format_double(pred(static_cast<Eigen::Index>(i))) + ',' + std::to_string(ds.rows[i].bin) + '\n';
  write_text_file(detail::path_in(o.out, "predictions.csv"), csv);
  manifest.output("metrics.json");
  manifest.output("predictions.csv");
  manifest.write(detail::path_in(o.out, kManifestName));
  out << "eval: r2=" << format_double(m.r2) << " mae=" << format_double(m.mae) << " mse=" << format_double(m.mse)
      << '\n';
  return kExitOk;
}

struct RankOptions {
  std::string data;
  std::size_t k = 20;
  std::string out;
};

inline int cmd_rank(const RankOptions& o, const nlohmann::json& flags, std::ostream& out) {
  detail::Manifest manifest("rank", flags);
  const std::string data_path = detail::resolve_dataset(o.data, "train.csv");
  const LabeledDataset ds = read_dataset(data_path);
  manifest.input(data_path);
  const auto ranked = ml::pearson_feature_ranking(ds, o.k);
  std::string csv = "rank,index,name,correlation,abs_correlation\n";
  for (std::size_t i = 0; i < ranked.size(); ++i)
    csv += std::to_string(i + 1) + ',' + std::to_string(ranked[i].index) + ',' + ranked[i].name + ',' +
           format_double(ranked[i].correlation) + ',' + format_double(std::abs(ranked[i].correlation)) + '\n';
  const std::string parent = detail::fs::path(o.out).parent_path().string();
  if (!parent.empty()) detail::ensure_directory(parent);
  write_text_file(o.out, csv);
  manifest.output(detail::file_name(o.out));
  manifest.write(o.out + ".manifest.json");
  out << "rank: top " << ranked.size() << " features written to " << o.out << '\n';
  return kExitOk;
}

struct ValidateOptions {
  std::string proposition;
  std::vector<std::string> models;
  std::string out;
  int workers = 1;
  Prop1Config prop1;
  Prop2Config prop2;
  SensitivityConfig gates;
  std::vector<std::string> noise_names = {"bit_flip", "phase", "depolarizing"};
};

/// prop1/prop2 write report.json and ratio_histogram.csv; gates writes
/// report.json and sensitivity.csv. Violations of either bound exit 6.
inline int cmd_validate(const ValidateOptions& o, const nlohmann::json& flags, std::ostream& out) {
  detail::Manifest manifest("validate " + o.proposition, flags);
  std::vector<ml::RegressionModel> models;
  for (const auto& path : o.models) {
    models.push_back(ml::load_model(path));
    manifest.input(path);
  }
  detail::ensure_directory(o.out);
  const std::string report_path = detail::path_in(o.out, "report.json");

  if (o.proposition == "gates") {
    SensitivityConfig c = o.gates;
    c.noises.clear();
    for (const auto& name : o.noise_names) c.noises.push_back(noise_kind_from_string(name));
    std::map<int, const ml::RegressionModel*> slots;
    for (const auto& m : models)
      if (!slots.emplace(m.layout.n_qubits, &m).second)
        throw ParameterError("two models given for " + std::to_string(m.layout.n_qubits) + "-qubit states");
    manifest.set("seed", c.seed);
    const auto report = gate_noise_sensitivity(c, slots, o.workers);
    nlohmann::json j = to_json(report);
    j["manifest"] = kManifestName;
    write_json_file(report_path, j);
    write_text_file(detail::path_in(o.out, "sensitivity.csv"), sensitivity_csv(report));
    manifest.output("report.json");
    manifest.output("sensitivity.csv");
    manifest.write(detail::path_in(o.out, kManifestName));
    out << "validate gates: " << report.gates.size() << "x" << report.noises.size() << " matrix written to " << o.out
        << '\n';
    return kExitOk;
  }

  if (models.size() > 1) throw ParameterError("validate " + o.proposition + " takes at most one --model");
  const ml::RegressionModel* model = models.empty() ? nullptr : &models.front();
  ValidationReport report;
  if (o.proposition == "prop1") {
    manifest.set("seed", o.prop1.seed);
    report = validate_prop1(o.prop1, model, o.workers);
  } else if (o.proposition == "prop2") {
    manifest.set("seed", o.prop2.seed);
    report = validate_prop2(o.prop2, model, o.workers);
  } else {
    throw ParameterError("unknown proposition '" + o.proposition + "'");
  }
  nlohmann::json j = to_json(report);
  j["manifest"] = kManifestName;
  write_json_file(report_path, j);
  write_text_file(detail::path_in(o.out, "ratio_histogram.csv"), ratio_histogram_csv(report));
  manifest.output("report.json");
  manifest.output("ratio_histogram.csv");
  manifest.write(detail::path_in(o.out, kManifestName));

  out << "validate " << o.proposition << ": trials=" << report.trials << " violations_true=" << report.violations_true;
  if (report.violations_pred) out << " violations_pred=" << *report.violations_pred;
  if (report.max_ratio_true) out << " max_ratio_true=" << format_double(*report.max_ratio_true);
  if (report.max_ratio_pred) out << " max_ratio_pred=" << format_double(*report.max_ratio_pred);
  out << '\n';
  return report.total_violations() > 0 ? kExitViolations : kExitOk;
}

// ------------------------------------------------------------------ parsing

/// Parses `args` (without the program name), runs the chosen command and
/// returns its exit code. Errors are reported on `err` as a single line.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Trace-distance regression and bound validation for quantum states and gates", "wdist"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::function<int()> action;
  auto checked_workers = [](CLI::App* sub, int& workers) {
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 1024));
  };

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate labelled state pairs and split them");
  gen_cmd->add_option("--qubits", gen.spec.n_qubits, "Qubits per state (gate size for gate kinds)");
  gen_cmd->add_option("--samples", gen.spec.n_samples, "Total number of pairs");
  gen_cmd->add_option("--bins", gen.spec.uniform_bins, "Uniform label bins (0 = natural distribution)");
  gen_cmd->add_option("--kind", gen.kind, "random_pure, random_mixed, gate_choi or mixed_config");
  gen_cmd->add_option("--seed", gen.spec.seed, "Root seed");
  gen_cmd->add_option("--rank", gen.spec.mixed_rank, "random_mixed rank (0 = random per state)");
  gen_cmd->add_option("--gate-fraction", gen.spec.gate_fraction, "Share of gate pairs for mixed_config");
  gen_cmd->add_option("--eps-min", gen.spec.eps_min, "Smallest gate perturbation strength");
  gen_cmd->add_option("--eps-max", gen.spec.eps_max, "Largest gate perturbation strength");
  gen_cmd->add_option("--train-frac", gen.fractions.train, "Training fraction");
  gen_cmd->add_option("--val-frac", gen.fractions.val, "Validation fraction");
  gen_cmd->add_option("--test-frac", gen.fractions.test, "Test fraction");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  checked_workers(gen_cmd, gen.workers);
  gen_cmd->callback([&] { action = [&] { return cmd_gen_data(gen, detail::flag_echo(*gen_cmd), out); }; });

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Fit a regression model");
  train_cmd->add_option("--model", train.model, "Model kind")->required();
  train_cmd->add_option("--data", train.data, "Training CSV or gen-data directory")->required();
  train_cmd->add_option("--val", train.val, "Validation CSV (defaults to val.csv of a directory)");
  train_cmd->add_option("--out", train.out, "Model file")->required();
  train_cmd->add_option("--hyperparams", train.hyperparams, "Hyperparameters as a JSON object");
  checked_workers(train_cmd, train.workers);
  train_cmd->callback([&] { action = [&] { return cmd_train(train, detail::flag_echo(*train_cmd), out); }; });

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset");
  eval_cmd->add_option("--model", eval.model, "Model file")->required();
  eval_cmd->add_option("--data", eval.data, "CSV or gen-data directory (test.csv)")->required();
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();
  eval_cmd->callback([&] { action = [&] { return cmd_eval(eval, detail::flag_echo(*eval_cmd), out); }; });

  RankOptions rank;
  auto* rank_cmd = app.add_subcommand("rank", "Rank features by Pearson correlation with the label");
  rank_cmd->add_option("--data", rank.data, "CSV or gen-data directory (train.csv)")->required();
  rank_cmd->add_option("--k", rank.k, "Number of features")->check(CLI::PositiveNumber);
  rank_cmd->add_option("--out", rank.out, "Output CSV")->required();
  rank_cmd->callback([&] { action = [&] { return cmd_rank(rank, detail::flag_echo(*rank_cmd), out); }; });

  ValidateOptions val;
  auto* val_cmd = app.add_subcommand("validate", "Monte-Carlo bound validation");
  val_cmd->require_subcommand(1);
  auto add_common = [&](CLI::App* sub, std::uint64_t& seed) {
    sub->add_option("--model", val.models, "Trained model file(s)");
    sub->add_option("--out", val.out, "Output directory")->required();
    sub->add_option("--seed", seed, "Root seed");
    checked_workers(sub, val.workers);
  };

  auto* p1 = val_cmd->add_subcommand("prop1", "Measurement-probability bound for gate pairs");
  add_common(p1, val.prop1.seed);
  p1->add_option("--qubits", val.prop1.n_qubits, "Gate size");
  p1->add_option("--trials", val.prop1.trials, "Trials");
  p1->add_option("--eps-min", val.prop1.eps_min, "Smallest perturbation strength");
  p1->add_option("--eps-max", val.prop1.eps_max, "Largest perturbation strength");
  p1->callback([&] {
    val.proposition = "prop1";
    action = [&] { return cmd_validate(val, detail::flag_echo(*p1), out); };
  });

  auto* p2 = val_cmd->add_subcommand("prop2", "Gate error-rate bound under mixed-unitary noise");
  add_common(p2, val.prop2.seed);
  p2->add_option("--qubits", val.prop2.n_qubits, "Gate size");
  p2->add_option("--trials", val.prop2.trials, "Trials");
  p2->add_option("--noise-unitaries", val.prop2.noise_unitaries, "Noise unitaries per channel");
  p2->add_option("--states", val.prop2.n_states, "Random states for the error-rate maximization");
  p2->add_option("--eps-min", val.prop2.eps_min, "Smallest perturbation strength");
  p2->add_option("--eps-max", val.prop2.eps_max, "Largest perturbation strength");
  p2->callback([&] {
    val.proposition = "prop2";
    action = [&] { return cmd_validate(val, detail::flag_echo(*p2), out); };
  });

  auto* gs = val_cmd->add_subcommand("gates", "Noise sensitivity of named gates");
  add_common(gs, val.gates.seed);
  gs->add_option("--gates", val.gates.gates, "Gate names")->delimiter(',');
  gs->add_option("--noises", val.noise_names, "Noise kinds")->delimiter(',');
  gs->add_option("--strength", val.gates.strength, "Noise strength p");
  gs->add_option("--angle", val.gates.angle, "Rotation angle for bit_flip and phase");
  gs->add_option("--states", val.gates.n_states, "Random states for the error-rate maximization");
  gs->callback([&] {
    val.proposition = "gates";
    action = [&] { return cmd_validate(val, detail::flag_echo(*gs), out); };
  });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, kExitUsage, "usage", e.what());
    CLI::App* failing = &app;
    for (CLI::App* sub = &app; sub != nullptr;) {
      const auto chosen = sub->get_subcommands();
      if (chosen.empty()) break;
      failing = sub = chosen.front();
    }
    err << failing->help();
    return kExitUsage;
  }

  try {
    return action();
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    report_error(err, code, to_string(e.kind()), e.what());
    return code;
  } catch (const std::exception& e) {
    report_error(err, kExitFailure, "internal", e.what());
    return kExitFailure;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace wdist::cli

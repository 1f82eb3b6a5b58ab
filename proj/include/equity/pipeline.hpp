#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "equity/dataset.hpp"
#include "equity/evaluation.hpp"
#include "equity/feature_selection.hpp"
#include "equity/labeling.hpp"
#include "equity/model_io.hpp"
#include "equity/report.hpp"
#include "equity/synth.hpp"

namespace equity {

inline constexpr std::uint64_t kDefaultSeed = 20160216;

struct PipelineConfig {
  std::string input;
  std::string output;
  std::string features_file;
  std::string model_path;
  std::string balanced_output;
  std::string report_path;
  std::vector<std::string> algorithms{"random_forest"};
  std::vector<std::string> hyperparameters;  // name=value
  double threshold = 0.10;
  int horizon = 4;
  bool strict = false;
  std::size_t k = 10;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  char delimiter = ',';
  bool corrected_t_test = false;
  // synth
  std::string profile = "default";
  std::optional<std::size_t> n_stocks;
  std::optional<double> missing_rate;
  std::optional<double> noise_std;
};

namespace detail {

inline LabelOptions label_options(const PipelineConfig& c) { return LabelOptions{c.threshold, c.horizon, c.strict}; }

inline Hyperparameters parse_hyperparameters(const std::vector<std::string>& items) {
  Hyperparameters hp;
  for (const auto& item : items) {
    auto eq = item.find('=');
    double v = 0.0;
    if (eq == std::string::npos || parse_number(std::string_view(item).substr(eq + 1), v) != NumberStatus::kOk) {
      throw UsageError("hyperparameter must look like name=value, got '" + item + "'");
    }
    hp[item.substr(0, eq)] = v;
  }
  return hp;
}

inline LearnerSpec learner_spec(const PipelineConfig& c, const std::string& algo) {
  auto a = parse_algorithm(algo);
  if (!a) throw UsageError("unknown algorithm '" + algo + "'");
  return LearnerSpec::make(*a, parse_hyperparameters(c.hyperparameters), c.seed);
}

inline FeatureSet feature_set(const PipelineConfig& c) {
  if (c.features_file.empty()) return FeatureSet::all();
  std::istringstream in(read_file(c.features_file));
  return read_feature_list(in);
}

inline std::vector<StockSnapshot> read_snapshots(const std::string& path, char delim, std::ostream& err) {
  std::istringstream in(read_file(path));
  auto parsed = parse_snapshots(in, ParseOptions{delim});
  for (const auto& d : parsed.diagnostics) {
    err << "warning: " << path << ":" << d.row << ": skipped row: " << d.reason << "\n";
  }
  return std::move(parsed.snapshots);
}

// A labeled file is used as is (projected onto --features when given); a
// snapshot file is labeled and balanced first.
inline LabeledDataset load_training_data(const PipelineConfig& c, std::ostream& err) {
  if (c.input.empty()) throw UsageError("--input is required");
  const std::string text = read_file(c.input);
  const std::string header = text.substr(0, text.find('\n'));
  std::istringstream in(text);
  if (is_labeled_header(header, c.delimiter)) {
    auto ds = read_labeled(in, c.delimiter);
    if (!c.features_file.empty()) ds = project(ds, feature_set(c));
    return ds;
  }
  auto parsed = parse_snapshots(in, ParseOptions{c.delimiter});
  for (const auto& d : parsed.diagnostics) {
    err << "warning: " << c.input << ":" << d.row << ": skipped row: " << d.reason << "\n";
  }
  auto built = build_dataset(parsed.snapshots, feature_set(c), label_options(c));
  auto balanced = balance(built.dataset, c.seed);
  if (!c.balanced_output.empty()) {
    std::ostringstream os;
    write_labeled(os, balanced, c.delimiter);
    write_file(c.balanced_output, os.str());
  }
  return balanced;
}

inline void emit(const PipelineConfig& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) {
    out << text;
  } else {
    write_file(c.output, text);
  }
}

inline std::string counts_line(const LabeledDataset& ds) {
  return "Good: " + std::to_string(ds.count(Label::kGood)) + "  Bad: " + std::to_string(ds.count(Label::kBad)) +
         "  rows: " + std::to_string(ds.size());
}

inline std::string render_schema() {
  std::ostringstream os;
  os << "Snapshot file columns (header row required, comma-delimited by default):\n"
     << "  ticker         string, required\n"
     << "  year           integer, required\n"
     << "  quarter        1..4, required\n"
     << "  history_price  positive decimal, required (quarter-end price)\n"
     << "  future_price   positive decimal, optional (price four quarters later)\n"
     << "  <indicator>    decimal, optional; empty, NaN, Inf or -9999 means not available\n\n"
     << "Indicators (" << kIndicatorCount << "):\n";
  std::size_t width = 0;
  for (const auto& e : kIndicators) width = std::max(width, e.id.size());
  for (std::size_t i = 0; i < kIndicators.size(); ++i) {
    const auto& e = kIndicators[i];
    char num[8];
    std::snprintf(num, sizeof num, "%2zu", i + 1);
    os << "  " << num << "  " << pad(std::string(e.id), width + 2) << pad(std::string(unit_name(e.unit)), 10)
       << e.description << "\n";
  }
  os << "\nPseudo-feature: history_price (read from the history_price column)\n"
     << "Missing values in feature vectors are encoded as " << format_number(kMissing) << ".\n";
  return os.str();
}

// --- subcommands ----------------------------------------------------------

inline void cmd_schema(const PipelineConfig& c, std::ostream& out) { emit(c, render_schema(), out); }

inline void cmd_synth(const PipelineConfig& c, std::ostream& out) {
  if (c.output.empty()) throw UsageError("synth needs --output");
  if (c.profile != "default") throw UsageError("unknown synthetic profile '" + c.profile + "'");
  SynthConfig cfg = default_profile();
  cfg.threshold = c.threshold;
  if (c.n_stocks) cfg.n_stocks = *c.n_stocks;
  if (c.missing_rate) cfg.missing_rate = *c.missing_rate;
  if (c.noise_std) cfg.noise_std = *c.noise_std;
  const auto snapshots = generate(cfg, c.seed);
  std::ostringstream os;
  write_snapshots(os, snapshots, c.delimiter);
  write_file(c.output, os.str());
  out << "wrote " << snapshots.size() << " snapshots for " << cfg.n_stocks << " stocks to " << c.output << "\n";
}

inline void cmd_label(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  if (c.input.empty() || c.output.empty()) throw UsageError("label needs --input and --output");
  const auto snapshots = read_snapshots(c.input, c.delimiter, err);
  auto built = build_dataset(snapshots, feature_set(c), label_options(c));
  std::ostringstream os;
  write_labeled(os, built.dataset, c.delimiter);
  write_file(c.output, os.str());
  out << "labeled  " << counts_line(built.dataset) << "  dropped: " << built.dropped << "\n";
  if (!c.balanced_output.empty()) {
    auto balanced = balance(built.dataset, c.seed);
    std::ostringstream bs;
    write_labeled(bs, balanced, c.delimiter);
    write_file(c.balanced_output, bs.str());
    out << "balanced " << counts_line(balanced) << "\n";
  }
}

inline void cmd_balance(const PipelineConfig& c, std::ostream& out) {
  if (c.input.empty() || c.output.empty()) throw UsageError("balance needs --input and --output");
  std::istringstream in(read_file(c.input));
  const auto ds = read_labeled(in, c.delimiter);
  const auto balanced = balance(ds, c.seed);
  std::ostringstream os;
  write_labeled(os, balanced, c.delimiter);
  write_file(c.output, os.str());
  out << "input    " << counts_line(ds) << "\nbalanced " << counts_line(balanced) << "\n";
}

inline std::string training_timestamp() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') return epoch;
  return "unset";
}

inline void cmd_train(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  if (c.output.empty()) throw UsageError("train needs --output");
  if (c.algorithms.size() != 1) throw UsageError("train takes exactly one --algo");
  const auto spec = learner_spec(c, c.algorithms.front());
  const auto ds = load_training_data(c, err);
  Model model = train(spec, ds, c.threads);
  model.metadata.dataset_digest = dataset_digest(ds);
  model.metadata.timestamp = training_timestamp();
  const auto digest = save_model(model, c.output);
  out << "trained " << algorithm_id(spec.algorithm) << " on " << ds.size() << " rows, " << ds.features.size()
      << " features\nmodel " << c.output << " digest " << digest << "\n";
}

inline void cmd_evaluate(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  if (c.algorithms.empty()) throw UsageError("evaluate needs --algo");
  std::vector<LearnerSpec> specs;
  for (const auto& a : c.algorithms) specs.push_back(learner_spec(c, a));
  const auto ds = load_training_data(c, err);
  const auto folds = stratified_folds(ds, c.k, c.seed);
  const Table table(ds);
  std::vector<EvalReport> reports;
  for (const auto& spec : specs) {
    try {
      reports.push_back(cross_validate(spec, table, ds.features, folds, c.seed, c.threads));
    } catch (const TrainingError& e) {
      throw EvaluationError(std::string(algorithm_id(spec.algorithm)) + ": " + e.what());
    }
  }

  nlohmann::json j;
  j["dataset"] = {{"rows", ds.size()},
                  {"good", ds.count(Label::kGood)},
                  {"bad", ds.count(Label::kBad)},
                  {"features", ds.features.members()},
                  {"digest", dataset_digest(ds)}};
  j["reports"] = nlohmann::json::array();
  for (const auto& r : reports) j["reports"].push_back(to_json(r));
  j["comparisons"] = nlohmann::json::array();
  std::string tests;
  PairedTTestOptions topt;
  if (c.corrected_t_test) topt.corrected_test_train_ratio = 1.0 / static_cast<double>(c.k - 1);
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto t = paired_t_test(reports[0].fold_f_scores, reports[i].fold_f_scores, topt);
    j["comparisons"].push_back({{"a", algorithm_id(reports[0].spec.algorithm)},
                                {"b", algorithm_id(reports[i].spec.algorithm)},
                                {"corrected", c.corrected_t_test},
                                {"test", to_json(t)}});
    char line[256];
    std::snprintf(line, sizeof line, "paired t-test %s vs %s: t = %.4f, p = %.4g, %s at alpha %.2f\n",
                  std::string(algorithm_title(reports[0].spec.algorithm)).c_str(),
                  std::string(algorithm_title(reports[i].spec.algorithm)).c_str(), t.t, t.p,
                  t.significant ? "significant" : "not significant", t.alpha);
    tests += line;
  }
  out << ds.size() << " rows, " << ds.features.size() << " features, " << c.k << "-fold stratified CV, seed "
      << c.seed << "\n\n"
      << render_table(reports) << (tests.empty() ? "" : "\n" + tests);
  if (!c.output.empty()) write_file(c.output, j.dump(2) + "\n");
}

inline void cmd_select(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  if (c.output.empty()) throw UsageError("select-features needs --output");
  if (c.algorithms.size() != 1) throw UsageError("select-features takes exactly one --algo");
  const auto spec = learner_spec(c, c.algorithms.front());
  const auto ds = load_training_data(c, err);
  const auto result = backward_eliminate(ds, spec, c.k, c.seed, c.threads);
  std::ostringstream fl;
  fl << "# selected by backward elimination: " << spec.describe() << ", k=" << c.k << ", seed=" << c.seed
     << ", F-score " << format_number(result.final_score) << "\n";
  write_feature_list(fl, result.selected);
  write_file(c.output, fl.str());
  if (!c.report_path.empty()) write_file(c.report_path, to_json(result).dump(2) + "\n");
  out << render_trace(result);
}

inline void cmd_predict(const PipelineConfig& c, std::ostream& out, std::ostream& err) {
  if (c.model_path.empty() || c.input.empty()) throw UsageError("predict needs --model and --input");
  const Model model = load_model(c.model_path);
  const auto snapshots = read_snapshots(c.input, c.delimiter, err);
  std::string text;
  for (const auto& s : snapshots) {
    const auto p = predict(model, to_feature_vector(s, model.features));
    text += s.ticker + "," + std::string(to_string(p.label)) + "," + format_number(p.score) + "\n";
  }
  emit(c, text, out);
}

}  // namespace detail

// Parses argv and runs one subcommand. Returns the process exit code; one-line
// diagnostics go to `err`.
inline int run_pipeline(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  PipelineConfig c;
  CLI::App app{"Long-horizon equity movement classification toolkit", "equity"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value file mirroring the flags; flags override it");

  std::string delimiter = ",";
  std::string algos = "random_forest";
  std::uint64_t seed = kDefaultSeed;
  app.add_option("--input", c.input, "Input file (snapshots or labeled dataset)");
  app.add_option("--output", c.output, "Output file");
  app.add_option("--features", c.features_file, "Feature-list file, one id per line");
  app.add_option("--algo", algos, "Algorithm id, or comma-separated ids for evaluate");
  app.add_option("--hp", c.hyperparameters, "Hyperparameter override name=value (repeatable)");
  app.add_option("--threshold", c.threshold, "Growth threshold for Good")->capture_default_str();
  app.add_option("--horizon", c.horizon, "Horizon in quarters")->capture_default_str();
  app.add_flag("--strict", c.strict, "Require growth strictly above the threshold");
  app.add_option("--k", c.k, "Cross-validation folds")->capture_default_str();
  app.add_option("--seed", seed, "Master seed")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker thread cap (results do not depend on it)")->capture_default_str();
  app.add_option("--delimiter", delimiter, "Field delimiter")->capture_default_str();
  app.add_option("--balanced-output", c.balanced_output, "Also write the balanced dataset here");
  app.add_option("--profile", c.profile, "Synthetic profile (synth)")->capture_default_str();
  app.add_option("--n-stocks", c.n_stocks, "Number of stocks (synth)");
  app.add_option("--missing-rate", c.missing_rate, "Per-indicator missing probability (synth)");
  app.add_option("--noise-std", c.noise_std, "Standard deviation of the return noise (synth)");
  app.add_flag("--corrected", c.corrected_t_test, "Use the resampled-variance corrected t-test (evaluate)");
  app.add_option("--report", c.report_path, "Write the elimination trace as JSON (select-features)");
  app.add_option("--model", c.model_path, "Model file (predict)");

  auto* schema = app.add_subcommand("schema", "Print the indicator registry and snapshot schema");
  auto* synth = app.add_subcommand("synth", "Generate a synthetic snapshot file");
  auto* label = app.add_subcommand("label", "Label snapshots and write a labeled dataset");
  auto* balance_cmd = app.add_subcommand("balance", "Downsample the majority class of a labeled dataset");
  auto* train_cmd = app.add_subcommand("train", "Train a model and save it");
  auto* evaluate = app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
  auto* select = app.add_subcommand("select-features", "Greedy backward feature elimination");
  auto* predict_cmd = app.add_subcommand("predict", "Score snapshots with a saved model");
  for (auto* sub : {schema, synth, label, balance_cmd, train_cmd, evaluate, select, predict_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
    c.delimiter = delimiter.front();
    c.seed = seed;
    c.algorithms.clear();
    std::stringstream ss(algos);
    for (std::string a; std::getline(ss, a, ',');) {
      if (!a.empty()) c.algorithms.push_back(a);
    }
    if (c.threads == 0) c.threads = 1;

    if (schema->parsed()) detail::cmd_schema(c, out);
    else if (synth->parsed()) detail::cmd_synth(c, out);
    else if (label->parsed()) detail::cmd_label(c, out, err);
    else if (balance_cmd->parsed()) detail::cmd_balance(c, out);
    else if (train_cmd->parsed()) detail::cmd_train(c, out, err);
    else if (evaluate->parsed()) detail::cmd_evaluate(c, out, err);
    else if (select->parsed()) detail::cmd_select(c, out, err);
    else if (predict_cmd->parsed()) detail::cmd_predict(c, out, err);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kUsage);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kUsage);
  }
}

}  // namespace equity

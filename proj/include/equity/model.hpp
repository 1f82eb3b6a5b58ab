#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>

#include "equity/errors.hpp"
#include "equity/forest.hpp"
#include "equity/logistic.hpp"
#include "equity/naive_bayes.hpp"
#include "equity/tree.hpp"

namespace equity {

enum class Algorithm { kC45Tree, kRandomTree, kRandomForest, kNaiveBayes, kLogistic };

inline constexpr std::array<Algorithm, 5> kAllAlgorithms{Algorithm::kC45Tree, Algorithm::kRandomTree,
                                                        Algorithm::kRandomForest, Algorithm::kNaiveBayes,
                                                        Algorithm::kLogistic};

inline std::string_view algorithm_id(Algorithm a) {
  switch (a) {
    case Algorithm::kC45Tree: return "c45_tree";
    case Algorithm::kRandomTree: return "random_tree";
    case Algorithm::kRandomForest: return "random_forest";
    case Algorithm::kNaiveBayes: return "naive_bayes";
    case Algorithm::kLogistic: return "logistic";
  }
  return "?";
}

// Display names used in report tables.
inline std::string_view algorithm_title(Algorithm a) {
  switch (a) {
    case Algorithm::kC45Tree: return "C4.5 decision tree";
    case Algorithm::kRandomTree: return "Random Tree";
    case Algorithm::kRandomForest: return "Random Forest";
    case Algorithm::kNaiveBayes: return "Naive Bayes";
    case Algorithm::kLogistic: return "Logistic regression";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view id) {
  for (auto a : kAllAlgorithms) {
    if (algorithm_id(a) == id) return a;
  }
  return std::nullopt;
}

inline bool is_randomized(Algorithm a) { return a == Algorithm::kRandomTree || a == Algorithm::kRandomForest; }

using Hyperparameters = std::map<std::string, double>;

// Accepted hyperparameters and their defaults. k = 0 means floor(log2 F) + 1.
inline const Hyperparameters& default_hyperparameters(Algorithm a) {
  static const std::map<Algorithm, Hyperparameters> table{
      {Algorithm::kC45Tree, {{"min_leaf", 2}, {"confidence", 0.25}, {"prune", 1}, {"max_depth", 0}}},
      {Algorithm::kRandomTree, {{"min_leaf", 2}, {"k", 0}, {"max_depth", 0}}},
      {Algorithm::kRandomForest, {{"trees", 100}, {"k", 0}, {"min_leaf", 2}, {"max_depth", 0}, {"bootstrap", 1}}},
      {Algorithm::kNaiveBayes, {{"variance_floor", 1e-9}}},
      {Algorithm::kLogistic, {{"ridge", 1e-8}, {"tolerance", 1e-6}, {"max_iterations", 500}}},
  };
  return table.at(a);
}

struct LearnerSpec {
  Algorithm algorithm = Algorithm::kRandomForest;
  Hyperparameters hyperparameters;  // fully resolved, defaults filled in
  std::optional<std::uint64_t> seed;

  // Rejects unknown names and out-of-range values; randomized learners need a seed.
  static LearnerSpec make(Algorithm algorithm, const Hyperparameters& overrides = {},
                          std::optional<std::uint64_t> seed = std::nullopt) {
    LearnerSpec spec;
    spec.algorithm = algorithm;
    spec.seed = seed;
    spec.hyperparameters = default_hyperparameters(algorithm);
    for (const auto& [name, value] : overrides) {
      auto it = spec.hyperparameters.find(name);
      if (it == spec.hyperparameters.end()) {
        throw UsageError("unknown hyperparameter '" + name + "' for " + std::string(algorithm_id(algorithm)));
      }
      if (!std::isfinite(value)) throw UsageError("hyperparameter '" + name + "' must be finite");
      it->second = value;
    }
    spec.validate();
    return spec;
  }

  double get(const std::string& name) const { return hyperparameters.at(name); }
  std::size_t get_count(const std::string& name) const { return static_cast<std::size_t>(get(name)); }

  std::string describe() const {
    std::string out(algorithm_id(algorithm));
    for (const auto& [k, v] : hyperparameters) out += " " + k + "=" + detail::format_number(v);
    return out;
  }

  friend bool operator==(const LearnerSpec&, const LearnerSpec&) = default;

 private:
  void validate() const {
    auto integral = [&](const char* name, double lo) {
      auto it = hyperparameters.find(name);
      if (it == hyperparameters.end()) return;
      if (it->second < lo || std::floor(it->second) != it->second) {
        throw UsageError(std::string("hyperparameter '") + name + "' must be an integer >= " +
                         detail::format_number(lo));
      }
    };
    integral("min_leaf", 1);
    integral("max_depth", 0);
    integral("k", 0);
    integral("trees", 1);
    integral("prune", 0);
    integral("bootstrap", 0);
    integral("max_iterations", 0);
    if (auto it = hyperparameters.find("confidence"); it != hyperparameters.end()) {
      if (!(it->second > 0 && it->second <= 0.5)) throw UsageError("confidence must lie in (0, 0.5]");
    }
    for (const char* name : {"variance_floor", "tolerance"}) {
      if (auto it = hyperparameters.find(name); it != hyperparameters.end() && !(it->second > 0)) {
        throw UsageError(std::string(name) + " must be positive");
      }
    }
    if (auto it = hyperparameters.find("ridge"); it != hyperparameters.end() && it->second < 0) {
      throw UsageError("ridge must be non-negative");
    }
    if (is_randomized(algorithm) && !seed) {
      throw UsageError(std::string(algorithm_id(algorithm)) + " requires a seed");
    }
  }
};

struct Prediction {
  Label label = Label::kBad;
  double score = 0.0;  // probability assigned to Good
};

// Score exactly 0.5 goes to Good.
inline Prediction make_prediction(double score) {
  return Prediction{score >= 0.5 ? Label::kGood : Label::kBad, score};
}

using ModelParameters = std::variant<TreeModel, ForestModel, NaiveBayesModel, LogisticModel>;

struct TrainingMetadata {
  std::string dataset_digest;
  std::string timestamp = "unset";
};

struct Model {
  LearnerSpec spec;
  FeatureSet features;
  ModelParameters parameters;
  TrainingMetadata metadata;

  double score(std::span<const double> x) const {
    return std::visit([&](const auto& m) { return m.score(x); }, parameters);
  }
};

inline Prediction predict(const Model& model, std::span<const double> vector) {
  if (vector.size() != model.features.size()) {
    throw std::invalid_argument("feature vector has " + std::to_string(vector.size()) + " values, model expects " +
                                std::to_string(model.features.size()));
  }
  return make_prediction(model.score(vector));
}

// Trains on a row subset of a prepared table; the seed in `spec` drives all
// randomness.
inline Model train_on(const LearnerSpec& spec, const Table& table, std::span<const std::size_t> rows,
                      const FeatureSet& features, unsigned threads = 1) {
  if (rows.empty()) throw TrainingError("training set is empty");
  Model model;
  model.spec = spec;
  model.features = features;
  std::vector<std::size_t> row_copy(rows.begin(), rows.end());
  switch (spec.algorithm) {
    case Algorithm::kC45Tree: {
      TreeParams p;
      p.min_leaf = spec.get_count("min_leaf");
      p.max_depth = spec.get_count("max_depth");
      p.prune = spec.get("prune") != 0;
      p.confidence = spec.get("confidence");
      model.parameters = grow_tree(table, std::move(row_copy), features, p);
      break;
    }
    case Algorithm::kRandomTree: {
      TreeParams p;
      p.min_leaf = spec.get_count("min_leaf");
      p.max_depth = spec.get_count("max_depth");
      p.prune = false;
      p.features_per_split = spec.get_count("k");
      if (p.features_per_split == 0) p.features_per_split = default_features_per_split(table.cols());
      Rng rng(derive_seed(*spec.seed, "random_tree"));
      model.parameters = grow_tree(table, std::move(row_copy), features, p, &rng);
      break;
    }
    case Algorithm::kRandomForest: {
      ForestParams p;
      p.trees = spec.get_count("trees");
      p.features_per_split = spec.get_count("k");
      p.min_leaf = spec.get_count("min_leaf");
      p.max_depth = spec.get_count("max_depth");
      p.bootstrap = spec.get("bootstrap") != 0;
      model.parameters = grow_forest(table, rows, features, p, *spec.seed, threads);
      break;
    }
    case Algorithm::kNaiveBayes:
      model.parameters = fit_naive_bayes(table, rows, features, spec.get("variance_floor"));
      break;
    case Algorithm::kLogistic: {
      LogisticParams p;
      p.ridge = spec.get("ridge");
      p.tolerance = spec.get("tolerance");
      p.max_iterations = spec.get_count("max_iterations");
      model.parameters = fit_logistic(table, rows, features, p);
      break;
    }
  }
  return model;
}

inline Model train(const LearnerSpec& spec, const LabeledDataset& dataset, unsigned threads = 1) {
  if (dataset.examples.empty()) throw TrainingError("training set is empty");
  Table table(dataset);
  return train_on(spec, table, detail::all_rows(table), dataset.features, threads);
}

}  // namespace equity

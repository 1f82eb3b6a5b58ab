#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "equity/evaluation.hpp"

namespace equity {

struct SelectionStep {
  std::size_t pass = 0;
  std::string candidate;  // feature evaluated for removal
  double score_before = 0.0;
  double score_after = 0.0;
  bool accepted = false;
};

struct SelectionResult {
  FeatureSet initial;
  FeatureSet selected;
  double initial_score = 0.0;
  double final_score = 0.0;
  std::vector<SelectionStep> trace;
  LearnerSpec spec;
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

// Greedy backward elimination on cross-validated weighted F. Every pass tries
// removing each remaining feature (one fold assignment is reused for the whole
// run) and drops the one whose removal scores highest, provided it scores at
// least the current set; ties go to the lowest feature index.
inline SelectionResult backward_eliminate(const LabeledDataset& dataset, const LearnerSpec& spec, std::size_t k,
                                          std::uint64_t seed, unsigned threads = 1) {
  if (dataset.features.size() < 2) throw UsageError("feature selection needs at least two features");
  const auto folds = stratified_folds(dataset, k, seed);

  auto score_of = [&](const FeatureSet& subset) {
    const auto projected = project(dataset, subset);
    Table table(projected);
    return cross_validate(spec, table, subset, folds, seed, threads).metrics.f_score;
  };

  SelectionResult result;
  result.initial = dataset.features;
  result.spec = spec;
  result.k = k;
  result.seed = seed;
  FeatureSet current = dataset.features;
  double current_score = score_of(current);
  result.initial_score = current_score;

  for (std::size_t pass = 1; current.size() >= 2; ++pass) {
    std::vector<double> scores(current.size());
    parallel_for(current.size(), threads, [&](std::size_t i) {
      try {
        scores[i] = score_of(current.without(i));
      } catch (const Error& e) {
        throw EvaluationError("while evaluating removal of '" + current[i] + "': " + e.what());
      }
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    const bool accept = scores[best] >= current_score;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      result.trace.push_back(SelectionStep{pass, current[i], current_score, scores[i], accept && i == best});
    }
    if (!accept) break;
    current = current.without(best);
    current_score = scores[best];
  }
  result.selected = current;
  result.final_score = current_score;
  return result;
}

// Applies the accepted removals of a trace, in order, to its initial set.
inline FeatureSet replay(const SelectionResult& result) {
  FeatureSet fs = result.initial;
  for (const auto& step : result.trace) {
    if (step.accepted) fs = fs.without(*fs.index_of(step.candidate));
  }
  return fs;
}

}  // namespace equity

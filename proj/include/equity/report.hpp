#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "equity/evaluation.hpp"
#include "equity/feature_selection.hpp"

namespace equity {

namespace detail {

// JSON has no infinities; they are written as strings.
inline nlohmann::json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace detail

inline nlohmann::json to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
}

inline nlohmann::json to_json(const LearnerSpec& spec) {
  nlohmann::json j;
  j["algorithm"] = algorithm_id(spec.algorithm);
  j["hyperparameters"] = spec.hyperparameters;
  j["seed"] = spec.seed ? nlohmann::json(*spec.seed) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["learner"] = to_json(r.spec);
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["folds"] = nlohmann::json::array();
  for (std::size_t f = 0; f < r.folds.size(); ++f) {
    auto fold = to_json(r.folds[f]);
    fold["f_score"] = r.fold_f_scores[f];
    j["folds"].push_back(std::move(fold));
  }
  j["pooled"] = to_json(r.pooled);
  j["precision"] = r.metrics.precision;
  j["recall"] = r.metrics.recall;
  j["f_score"] = r.metrics.f_score;
  j["accuracy"] = r.accuracy;
  return j;
}

inline nlohmann::json to_json(const TestResult& t) {
  return {{"t", detail::number_or_string(t.t)},
          {"p", t.p},
          {"alpha", t.alpha},
          {"degrees_of_freedom", t.degrees_of_freedom},
          {"significant", t.significant}};
}

// Algorithm / Precision / Recall / F-score, one row per report.
inline std::string render_table(const std::vector<EvalReport>& reports) {
  std::size_t width = std::string("Algorithm").size();
  for (const auto& r : reports) width = std::max(width, algorithm_title(r.spec.algorithm).size());
  width += 2;
  std::string out = detail::pad("Algorithm", width) + "Precision  Recall  F-score\n";
  for (const auto& r : reports) {
    out += detail::pad(std::string(algorithm_title(r.spec.algorithm)), width);
    out += detail::pad(detail::fixed3(r.metrics.precision), 11);
    out += detail::pad(detail::fixed3(r.metrics.recall), 8);
    out += detail::fixed3(r.metrics.f_score) + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const SelectionResult& s) {
  nlohmann::json j;
  j["learner"] = to_json(s.spec);
  j["k"] = s.k;
  j["seed"] = s.seed;
  j["initial_features"] = s.initial.members();
  j["initial_score"] = s.initial_score;
  j["selected_features"] = s.selected.members();
  j["final_score"] = s.final_score;
  j["trace"] = nlohmann::json::array();
  for (const auto& st : s.trace) {
    j["trace"].push_back({{"pass", st.pass},
                          {"candidate", st.candidate},
                          {"score_before", st.score_before},
                          {"score_after", st.score_after},
                          {"accepted", st.accepted}});
  }
  return j;
}

inline std::string render_trace(const SelectionResult& s) {
  std::size_t width = std::string("Candidate").size();
  for (const auto& st : s.trace) width = std::max(width, st.candidate.size());
  width += 2;
  std::string out = "Pass  " + detail::pad("Candidate", width) + "Before  After   Accepted\n";
  for (const auto& st : s.trace) {
    out += detail::pad(std::to_string(st.pass), 6) + detail::pad(st.candidate, width) +
           detail::pad(detail::fixed3(st.score_before), 8) + detail::pad(detail::fixed3(st.score_after), 8) +
           (st.accepted ? "yes" : "") + "\n";
  }
  out += "Selected " + std::to_string(s.selected.size()) + " of " + std::to_string(s.initial.size()) +
         " features, F-score " + detail::fixed3(s.initial_score) + " -> " + detail::fixed3(s.final_score) + "\n";
  return out;
}

}  // namespace equity

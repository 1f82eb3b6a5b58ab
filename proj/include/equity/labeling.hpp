#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "equity/dataset.hpp"
#include "equity/errors.hpp"
#include "equity/random.hpp"

namespace equity {

enum class Label : std::uint8_t { kBad = 0, kGood = 1 };

inline std::string_view to_string(Label l) { return l == Label::kGood ? "Good" : "Bad"; }

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "Good") return Label::kGood;
  if (s == "Bad") return Label::kBad;
  return std::nullopt;
}

struct Provenance {
  std::string ticker;
  Quarter quarter;
  friend bool operator==(const Provenance&, const Provenance&) = default;
  friend auto operator<=>(const Provenance& a, const Provenance& b) {
    if (auto c = a.ticker <=> b.ticker; c != 0) return c;
    return a.quarter <=> b.quarter;
  }
};

struct LabeledExample {
  FeatureVector vector;
  Label label = Label::kBad;
  Provenance provenance;
  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct LabeledDataset {
  FeatureSet features;
  std::vector<LabeledExample> examples;

  std::size_t size() const noexcept { return examples.size(); }
  std::size_t count(Label l) const {
    return static_cast<std::size_t>(
        std::count_if(examples.begin(), examples.end(), [l](const auto& e) { return e.label == l; }));
  }
  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

struct LabelOptions {
  double threshold = 0.10;
  int horizon_quarters = 4;
  // Require the growth target to be exceeded rather than reached.
  bool strict = false;
};

// Relative slack on the growth target, so that prices written in decimal
// (100 -> 110 at 10%) land on the documented side of the boundary.
inline constexpr double kBoundarySlack = 1e-12;

// Good iff future >= (1 + threshold) * history (inclusive), or strictly
// greater under strict mode.
inline Label label_move(double history_price, double future_price, double threshold = 0.10, bool strict = false) {
  if (!(history_price > 0.0) || !(future_price > 0.0) || !std::isfinite(history_price) ||
      !std::isfinite(future_price)) {
    throw LabelingError("prices must be positive and finite");
  }
  if (!(threshold > -1.0)) throw LabelingError("threshold must be greater than -1");
  const double ratio = future_price / history_price;
  const double target = 1.0 + threshold;
  if (strict) return ratio > target * (1.0 + kBoundarySlack) ? Label::kGood : Label::kBad;
  return ratio >= target * (1.0 - kBoundarySlack) ? Label::kGood : Label::kBad;
}

struct BuildResult {
  LabeledDataset dataset;
  std::size_t dropped = 0;  // snapshots with no price at the horizon
};

// One example per snapshot whose horizon price is known. The horizon price is
// the same ticker's snapshot price at Q + horizon; failing that, a four-quarter
// horizon falls back to the snapshot's own future_price.
inline BuildResult build_dataset(std::span<const StockSnapshot> snapshots, const FeatureSet& features,
                                 const LabelOptions& options = {}) {
  if (options.horizon_quarters < 1) throw LabelingError("horizon must be at least one quarter");
  if (features.empty()) throw LabelingError("feature set is empty");

  std::map<std::pair<std::string, int>, double> price_at;
  for (const auto& s : snapshots) {
    auto [it, inserted] = price_at.emplace(std::pair{s.ticker, s.quarter.index()}, s.history_price);
    if (!inserted) {
      throw LabelingError("duplicate snapshot for " + s.ticker + " " + to_string(s.quarter));
    }
  }

  BuildResult result;
  result.dataset.features = features;
  for (const auto& s : snapshots) {
    std::optional<double> future;
    auto it = price_at.find({s.ticker, s.quarter.index() + options.horizon_quarters});
    if (it != price_at.end()) {
      future = it->second;
    } else if (options.horizon_quarters == 4 && s.future_price) {
      future = s.future_price;
    }
    if (!future) {
      ++result.dropped;
      continue;
    }
    result.dataset.examples.push_back(
        LabeledExample{to_feature_vector(s, features),
                       label_move(s.history_price, *future, options.threshold, options.strict),
                       Provenance{s.ticker, s.quarter}});
  }
  if (result.dataset.examples.empty()) {
    throw LabelingError("no snapshot has a price " + std::to_string(options.horizon_quarters) +
                        " quarters ahead; dataset is empty");
  }
  return result;
}

// Keeps the minority class whole and downsamples the majority class uniformly
// at random. Surviving examples keep their input order.
inline LabeledDataset balance(const LabeledDataset& dataset, std::uint64_t seed) {
  std::vector<std::size_t> good, bad;
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
    (dataset.examples[i].label == Label::kGood ? good : bad).push_back(i);
  }
  if (good.empty() || bad.empty()) {
    throw LabelingError(std::string("cannot balance: no ") + (good.empty() ? "Good" : "Bad") + " examples");
  }
  auto& majority = good.size() > bad.size() ? good : bad;
  const std::size_t keep = std::min(good.size(), bad.size());
  Rng rng(derive_seed(seed, "balance"));
  rng.shuffle(std::span<std::size_t>(majority));
  majority.resize(keep);

  std::vector<bool> kept(dataset.examples.size(), false);
  for (auto i : good) kept[i] = true;
  for (auto i : bad) kept[i] = true;

  LabeledDataset out;
  out.features = dataset.features;
  out.examples.reserve(2 * keep);
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
    if (kept[i]) out.examples.push_back(dataset.examples[i]);
  }
  return out;
}

// Restricts every example to a subset of the dataset's features.
inline LabeledDataset project(const LabeledDataset& dataset, const FeatureSet& subset) {
  std::vector<std::size_t> cols;
  for (const auto& id : subset.members()) {
    auto idx = dataset.features.index_of(id);
    if (!idx) throw UsageError("feature '" + id + "' is not present in the dataset");
    cols.push_back(*idx);
  }
  LabeledDataset out;
  out.features = subset;
  out.examples.reserve(dataset.size());
  for (const auto& e : dataset.examples) {
    LabeledExample p{{}, e.label, e.provenance};
    p.vector.reserve(cols.size());
    for (auto c : cols) p.vector.push_back(e.vector[c]);
    out.examples.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labeled-dataset file: feature columns, then label, ticker, quarter.

inline void write_labeled(std::ostream& out, const LabeledDataset& dataset, char delim = ',') {
  for (const auto& id : dataset.features.members()) out << id << delim;
  out << "label" << delim << "ticker" << delim << "quarter\n";
  for (const auto& e : dataset.examples) {
    for (double v : e.vector) out << detail::format_number(v) << delim;
    out << to_string(e.label) << delim << e.provenance.ticker << delim << to_string(e.provenance.quarter) << '\n';
  }
}

// True when a header row names the trailing label/ticker/quarter columns.
inline bool is_labeled_header(std::string_view header_line, char delim = ',') {
  auto fields = detail::split_record(header_line, delim);
  return fields.size() >= 4 && fields[fields.size() - 3] == "label" && fields[fields.size() - 2] == "ticker" &&
         fields.back() == "quarter";
}

inline LabeledDataset read_labeled(std::istream& in, char delim = ',') {
  std::string line;
  if (!detail::read_line(in, line)) throw ParseError("labeled dataset: missing header row");
  auto header = detail::split_record(line, delim);
  if (!is_labeled_header(line, delim)) {
    throw ParseError("labeled dataset: header must end with label,ticker,quarter");
  }
  header.resize(header.size() - 3);
  LabeledDataset ds;
  ds.features = FeatureSet::make(header);
  if (!(ds.features.members() == header)) {
    throw ParseError("labeled dataset: feature columns are not in canonical order");
  }
  const std::size_t nf = header.size();
  std::set<Provenance> seen;
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_record(line, delim);
    auto where = "labeled dataset line " + std::to_string(line_no) + ": ";
    if (fields.size() != nf + 3) throw ParseError(where + "wrong field count");
    LabeledExample e;
    e.vector.resize(nf);
    for (std::size_t i = 0; i < nf; ++i) {
      double v = 0.0;
      auto st = detail::parse_number(fields[i], v);
      if (st == detail::NumberStatus::kInvalid) throw ParseError(where + "invalid value '" + fields[i] + "'");
      e.vector[i] = st == detail::NumberStatus::kOk ? v : kMissing;
    }
    auto label = parse_label(fields[nf]);
    if (!label) throw ParseError(where + "label must be Good or Bad");
    e.label = *label;
    e.provenance.ticker = fields[nf + 1];
    auto q = parse_quarter(fields[nf + 2]);
    if (!q) throw ParseError(where + "invalid quarter '" + fields[nf + 2] + "'");
    e.provenance.quarter = *q;
    if (!seen.insert(e.provenance).second) throw ParseError(where + "duplicate ticker/quarter");
    ds.examples.push_back(std::move(e));
  }
  if (in.bad()) throw IoError("failed while reading labeled dataset");
  return ds;
}

}  // namespace equity

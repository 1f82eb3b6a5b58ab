#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "equity/errors.hpp"

namespace equity {

// Reserved literal for "not present / not available" inside a feature vector.
inline constexpr double kMissing = -9999.0;

inline bool is_missing(double v) noexcept { return v == kMissing; }

enum class Unit { kCurrency, kRatio, kPercent, kCount };

inline std::string_view unit_name(Unit u) {
  switch (u) {
    case Unit::kCurrency: return "currency";
    case Unit::kRatio: return "ratio";
    case Unit::kPercent: return "percent";
    case Unit::kCount: return "count";
  }
  return "?";
}

struct IndicatorInfo {
  std::string_view id;
  std::string_view description;
  Unit unit;
};

inline constexpr std::size_t kIndicatorCount = 28;

// The 28 quarterly fundamental indicators, in canonical column order. Ids of
// the ten selected-set indicators keep their vendor field spelling; the rest
// are snake_case.
inline constexpr std::array<IndicatorInfo, kIndicatorCount> kIndicators{{
    {"book_value", "Net asset value: total assets minus intangible assets and liabilities", Unit::kCurrency},
    {"market_cap", "Share price times shares outstanding", Unit::kCurrency},
    {"net_price_change_1m", "Change of net price over one month", Unit::kCurrency},
    {"net_price_pct_change_1m", "Percentage change of net price over one month", Unit::kPercent},
    {"DIVIDEND_YIELD", "Annual dividends relative to share price", Unit::kPercent},
    {"BEST_EPS", "Earnings per share", Unit::kCurrency},
    {"eps_growth", "Growth of earnings per share over the trailing year", Unit::kPercent},
    {"sales_revenue_turnover", "Sales revenue turnover (opaque vendor field)", Unit::kCurrency},
    {"net_revenue", "Proceeds from sales net of commissions, taxes and related expenses", Unit::kCurrency},
    {"net_revenue_growth", "Growth of net revenue over the trailing year", Unit::kPercent},
    {"sales_growth", "Sales growth over the trailing year", Unit::kPercent},
    {"PE_RATIO", "Share price relative to per-share earnings", Unit::kRatio},
    {"pe_ratio_5y_avg", "Price to earnings ratio averaged over five years", Unit::kRatio},
    {"PX_TO_BOOK_RATIO", "Market price relative to book value", Unit::kRatio},
    {"px_to_sales_ratio", "Market capitalization divided by most recent annual revenue", Unit::kRatio},
    {"BEST_DPS", "Dividends paid over a year per ordinary share", Unit::kCurrency},
    {"CUR_RATIO", "Current assets over current liabilities", Unit::kRatio},
    {"QUICK_RATIO", "Cash, marketable securities and receivables over current liabilities", Unit::kRatio},
    {"TOT_DEBT_TO_TOT_EQY", "Total liabilities over stockholders' equity", Unit::kRatio},
    {"analyst_ratio", "Rating assigned by human analysts (opaque scale)", Unit::kRatio},
    {"revenue_growth_5y_cagr", "Revenue growth adjusted by five-year compound annual growth rate", Unit::kPercent},
    {"profit_margin", "Net income over revenue", Unit::kPercent},
    {"operating_margin", "Revenue left after variable production costs, over revenue", Unit::kPercent},
    {"return_on_equity", "Net income over stockholders' equity", Unit::kPercent},
    {"return_on_assets", "Net income over total assets", Unit::kPercent},
    {"ev_to_ebitda", "Enterprise value over EBITDA", Unit::kRatio},
    {"free_cash_flow_yield", "Free cash flow per share over share price", Unit::kPercent},
    {"asset_turnover", "Sales or revenues relative to total assets", Unit::kRatio},
}};

// Pseudo-feature read from the snapshot's quarter-end price.
inline constexpr std::string_view kHistoryPrice = "history_price";

// Number of columns in the full feature set (all indicators plus history_price).
inline constexpr std::size_t kFeatureUniverse = kIndicatorCount + 1;

struct IndicatorRegistry {
  std::span<const IndicatorInfo> entries;
};

inline IndicatorRegistry registry() { return IndicatorRegistry{kIndicators}; }

// Registry position of an indicator id; history_price maps to kIndicatorCount.
inline std::optional<std::size_t> feature_position(std::string_view id) {
  if (id == kHistoryPrice) return kIndicatorCount;
  for (std::size_t i = 0; i < kIndicators.size(); ++i) {
    if (kIndicators[i].id == id) return i;
  }
  return std::nullopt;
}

struct Quarter {
  int year = 0;
  int q = 1;  // 1..4

  constexpr int index() const noexcept { return year * 4 + (q - 1); }
  static constexpr Quarter from_index(int idx) noexcept {
    int y = idx >= 0 ? idx / 4 : -((-idx + 3) / 4);
    return Quarter{y, idx - y * 4 + 1};
  }
  constexpr Quarter plus(int quarters) const noexcept { return from_index(index() + quarters); }

  friend constexpr bool operator==(const Quarter&, const Quarter&) = default;
  friend constexpr auto operator<=>(const Quarter& a, const Quarter& b) { return a.index() <=> b.index(); }
};

inline std::string to_string(Quarter q) { return std::to_string(q.year) + "Q" + std::to_string(q.q); }

// Accepts "2014Q4".
inline std::optional<Quarter> parse_quarter(std::string_view text) {
  auto pos = text.find_first_of("Qq");
  if (pos == std::string_view::npos || pos + 2 != text.size()) return std::nullopt;
  int year = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + pos, year);
  if (ec != std::errc{} || p != text.data() + pos) return std::nullopt;
  int q = text[pos + 1] - '0';
  if (q < 1 || q > 4) return std::nullopt;
  return Quarter{year, q};
}

struct StockSnapshot {
  std::string ticker;
  Quarter quarter;
  // Indexed by registry position; nullopt means not available.
  std::array<std::optional<double>, kIndicatorCount> indicators{};
  double history_price = 0.0;
  std::optional<double> future_price;

  std::optional<double> indicator(std::string_view id) const {
    auto pos = feature_position(id);
    if (!pos || *pos >= kIndicatorCount) return std::nullopt;
    return indicators[*pos];
  }

  friend bool operator==(const StockSnapshot&, const StockSnapshot&) = default;
};

// Ordered, duplicate-free list of feature ids in canonical order (registry
// order, history_price last).
class FeatureSet {
 public:
  FeatureSet() = default;

  template <typename Range>
  static FeatureSet make(const Range& ids) {
    std::vector<std::pair<std::size_t, std::string>> ordered;
    for (const auto& raw : ids) {
      std::string id(raw);
      auto pos = feature_position(id);
      if (!pos) throw ParseError("unknown feature id '" + id + "'");
      for (const auto& [p, existing] : ordered) {
        if (p == *pos) throw ParseError("duplicate feature id '" + id + "'");
      }
      ordered.emplace_back(*pos, std::move(id));
    }
    if (ordered.empty()) throw ParseError("feature set is empty");
    std::sort(ordered.begin(), ordered.end());
    FeatureSet fs;
    for (auto& [p, id] : ordered) {
      fs.positions_.push_back(p);
      fs.members_.push_back(std::move(id));
    }
    return fs;
  }

  static FeatureSet make(std::initializer_list<std::string_view> ids) {
    return make(std::vector<std::string_view>(ids));
  }

  // All 28 indicators plus history_price.
  static FeatureSet all() {
    std::vector<std::string_view> ids;
    for (const auto& e : kIndicators) ids.push_back(e.id);
    ids.push_back(kHistoryPrice);
    return make(ids);
  }

  // The ten selected indicators plus history_price.
  static FeatureSet selected_eleven() {
    return make({"book_value", "market_cap", "DIVIDEND_YIELD", "BEST_EPS", "PE_RATIO", "PX_TO_BOOK_RATIO",
                 "BEST_DPS", "CUR_RATIO", "QUICK_RATIO", "TOT_DEBT_TO_TOT_EQY", "history_price"});
  }

  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const std::vector<std::string>& members() const noexcept { return members_; }
  const std::string& operator[](std::size_t i) const { return members_[i]; }
  // Registry position of member i (kIndicatorCount for history_price).
  std::size_t position(std::size_t i) const { return positions_[i]; }

  std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (members_[i] == id) return i;
    }
    return std::nullopt;
  }

  bool contains(std::string_view id) const { return index_of(id).has_value(); }

  FeatureSet without(std::size_t i) const {
    std::vector<std::string> rest;
    for (std::size_t j = 0; j < members_.size(); ++j) {
      if (j != i) rest.push_back(members_[j]);
    }
    return make(rest);
  }

  friend bool operator==(const FeatureSet& a, const FeatureSet& b) { return a.members_ == b.members_; }

 private:
  std::vector<std::string> members_;
  std::vector<std::size_t> positions_;
};

using FeatureVector = std::vector<double>;

// Stored values equal to the sentinel or non-finite are treated as missing.
inline double encode_value(std::optional<double> v) {
  if (!v || !std::isfinite(*v) || is_missing(*v)) return kMissing;
  return *v;
}

inline FeatureVector to_feature_vector(const StockSnapshot& snapshot, const FeatureSet& features) {
  FeatureVector out;
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::size_t pos = features.position(i);
    if (pos == kIndicatorCount) {
      out.push_back(encode_value(snapshot.history_price));
    } else {
      out.push_back(encode_value(snapshot.indicators[pos]));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Delimited text

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one record. Double-quoted fields may contain the delimiter; "" is an
// escaped quote.
inline std::vector<std::string> split_record(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

enum class NumberStatus { kOk, kEmpty, kNonFinite, kInvalid };

// Decimal or scientific notation. NaN/Inf spellings report kNonFinite.
inline NumberStatus parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return NumberStatus::kEmpty;
  if (text.front() == '+') text.remove_prefix(1);
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || p != text.data() + text.size()) {
    if (ec == std::errc::result_out_of_range) return NumberStatus::kNonFinite;
    return NumberStatus::kInvalid;
  }
  return std::isfinite(out) ? NumberStatus::kOk : NumberStatus::kNonFinite;
}

inline bool parse_int(std::string_view text, int& out) {
  text = trim(text);
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && p == text.data() + text.size() && !text.empty();
}

// Shortest representation that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace detail

struct Diagnostic {
  std::size_t row = 0;  // 1-based line number in the input, header is line 1
  std::string reason;
};

struct ParseOptions {
  char delimiter = ',';
};

struct SnapshotParseResult {
  std::vector<StockSnapshot> snapshots;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

struct SnapshotColumns {
  std::size_t ticker = SIZE_MAX, year = SIZE_MAX, quarter = SIZE_MAX, history_price = SIZE_MAX;
  std::optional<std::size_t> future_price;
  std::vector<std::pair<std::size_t, std::size_t>> indicators;  // (column, registry position)
  std::size_t count = 0;
};

inline SnapshotColumns map_snapshot_header(const std::vector<std::string>& header) {
  SnapshotColumns cols;
  cols.count = header.size();
  std::vector<bool> seen(kIndicatorCount, false);
  auto assign = [&](std::size_t& slot, std::size_t col, const std::string& name) {
    if (slot != SIZE_MAX) throw ParseError("duplicate column '" + name + "' in header");
    slot = col;
  };
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "ticker") {
      assign(cols.ticker, c, name);
    } else if (name == "year") {
      assign(cols.year, c, name);
    } else if (name == "quarter") {
      assign(cols.quarter, c, name);
    } else if (name == kHistoryPrice) {
      assign(cols.history_price, c, name);
    } else if (name == "future_price") {
      if (cols.future_price) throw ParseError("duplicate column 'future_price' in header");
      cols.future_price = c;
    } else {
      auto pos = feature_position(name);
      if (!pos || *pos >= kIndicatorCount) throw ParseError("unknown column '" + name + "' in header");
      if (seen[*pos]) throw ParseError("duplicate column '" + name + "' in header");
      seen[*pos] = true;
      cols.indicators.emplace_back(c, *pos);
    }
  }
  for (auto [slot, name] : {std::pair{cols.ticker, "ticker"}, std::pair{cols.year, "year"},
                            std::pair{cols.quarter, "quarter"}, std::pair{cols.history_price, "history_price"}}) {
    if (slot == SIZE_MAX) throw ParseError(std::string("missing required column '") + name + "' in header");
  }
  return cols;
}

}  // namespace detail

// Parses a snapshot table. Invalid data rows become diagnostics; a malformed
// header throws ParseError; a stream failure throws IoError.
inline SnapshotParseResult parse_snapshots(std::istream& in, const ParseOptions& options = {}) {
  SnapshotParseResult result;
  std::string line;
  std::size_t line_no = 0;
  if (!detail::read_line(in, line)) {
    if (in.bad()) throw IoError("failed to read snapshot stream");
    throw ParseError("missing header row");
  }
  ++line_no;
  const auto cols = detail::map_snapshot_header(detail::split_record(line, options.delimiter));

  while (detail::read_line(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_record(line, options.delimiter);
    auto reject = [&](std::string reason) { result.diagnostics.push_back({line_no, std::move(reason)}); };
    if (fields.size() != cols.count) {
      reject("expected " + std::to_string(cols.count) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    StockSnapshot s;
    s.ticker = fields[cols.ticker];
    if (s.ticker.empty()) {
      reject("empty ticker");
      continue;
    }
    if (!detail::parse_int(fields[cols.year], s.quarter.year)) {
      reject("invalid year '" + fields[cols.year] + "'");
      continue;
    }
    if (!detail::parse_int(fields[cols.quarter], s.quarter.q) || s.quarter.q < 1 || s.quarter.q > 4) {
      reject("invalid quarter '" + fields[cols.quarter] + "'");
      continue;
    }
    double price = 0.0;
    if (detail::parse_number(fields[cols.history_price], price) != detail::NumberStatus::kOk || price <= 0.0) {
      reject("history_price must be a positive finite number, got '" + fields[cols.history_price] + "'");
      continue;
    }
    s.history_price = price;
    if (cols.future_price) {
      const std::string& cell = fields[*cols.future_price];
      double fp = 0.0;
      auto st = detail::parse_number(cell, fp);
      if (st == detail::NumberStatus::kOk) {
        if (fp <= 0.0) {
          reject("future_price must be positive, got '" + cell + "'");
          continue;
        }
        s.future_price = fp;
      } else if (st != detail::NumberStatus::kEmpty) {
        reject("invalid future_price '" + cell + "'");
        continue;
      }
    }
    bool ok = true;
    for (auto [col, pos] : cols.indicators) {
      double v = 0.0;
      switch (detail::parse_number(fields[col], v)) {
        case detail::NumberStatus::kOk:
          if (!is_missing(v)) s.indicators[pos] = v;
          break;
        case detail::NumberStatus::kEmpty:
        case detail::NumberStatus::kNonFinite:
          break;
        case detail::NumberStatus::kInvalid:
          reject("invalid value '" + fields[col] + "' for " + std::string(kIndicators[pos].id));
          ok = false;
          break;
      }
      if (!ok) break;
    }
    if (ok) result.snapshots.push_back(std::move(s));
  }
  if (in.bad()) throw IoError("failed while reading snapshot stream");
  return result;
}

inline std::vector<std::string> snapshot_columns() {
  std::vector<std::string> cols{"ticker", "year", "quarter", std::string(kHistoryPrice), "future_price"};
  for (const auto& e : kIndicators) cols.emplace_back(e.id);
  return cols;
}

// Writes every registry column; absent values are empty cells.
inline void write_snapshots(std::ostream& out, std::span<const StockSnapshot> snapshots, char delim = ',') {
  const auto cols = snapshot_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? std::string(1, delim) : "") << cols[i];
  out << '\n';
  for (const auto& s : snapshots) {
    out << s.ticker << delim << s.quarter.year << delim << s.quarter.q << delim
        << detail::format_number(s.history_price) << delim;
    if (s.future_price) out << detail::format_number(*s.future_price);
    for (const auto& v : s.indicators) {
      out << delim;
      if (v) out << detail::format_number(*v);
    }
    out << '\n';
  }
}

// Feature-list file: one id per line; '#' starts a comment.
inline FeatureSet read_feature_list(std::istream& in) {
  std::vector<std::string> ids;
  std::string line;
  while (detail::read_line(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto id = detail::trim(line);
    if (!id.empty()) ids.emplace_back(id);
  }
  return FeatureSet::make(ids);
}

inline void write_feature_list(std::ostream& out, const FeatureSet& features) {
  for (const auto& id : features.members()) out << id << '\n';
}

}  // namespace equity

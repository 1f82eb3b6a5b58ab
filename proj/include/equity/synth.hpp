#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "equity/dataset.hpp"
#include "equity/errors.hpp"
#include "equity/random.hpp"

namespace equity {

// Marginal of one indicator as a function of its standard-normal driver z:
// log-normal exp(location + spread * z) or normal location + spread * z.
struct Marginal {
  enum class Kind { kLogNormal, kNormal } kind;
  double location;
  double spread;

  double value(double z) const {
    return kind == Kind::kLogNormal ? std::exp(location + spread * z) : location + spread * z;
  }
};

// Default marginals for the 28 indicators (registry order) and, last,
// history_price. Currency amounts are in millions where that is the natural
// reporting unit.
inline const std::array<Marginal, kFeatureUniverse>& default_marginals() {
  using K = Marginal::Kind;
  static const std::array<Marginal, kFeatureUniverse> m{{
      {K::kLogNormal, 7.0, 1.4},    // book_value
      {K::kLogNormal, 8.0, 1.5},    // market_cap
      {K::kNormal, 0.2, 2.5},       // net_price_change_1m
      {K::kNormal, 0.5, 6.0},       // net_price_pct_change_1m
      {K::kLogNormal, 0.6, 0.7},    // DIVIDEND_YIELD
      {K::kNormal, 2.5, 2.0},       // BEST_EPS
      {K::kNormal, 8.0, 20.0},      // eps_growth
      {K::kLogNormal, 7.2, 1.3},    // sales_revenue_turnover
      {K::kLogNormal, 5.0, 1.6},    // net_revenue
      {K::kNormal, 6.0, 15.0},      // net_revenue_growth
      {K::kNormal, 5.0, 12.0},      // sales_growth
      {K::kLogNormal, 2.9, 0.5},    // PE_RATIO
      {K::kLogNormal, 2.9, 0.4},    // pe_ratio_5y_avg
      {K::kLogNormal, 0.8, 0.7},    // PX_TO_BOOK_RATIO
      {K::kLogNormal, 0.5, 0.9},    // px_to_sales_ratio
      {K::kLogNormal, 0.0, 0.9},    // BEST_DPS
      {K::kLogNormal, 0.4, 0.45},   // CUR_RATIO
      {K::kLogNormal, 0.1, 0.5},    // QUICK_RATIO
      {K::kLogNormal, -0.5, 0.8},   // TOT_DEBT_TO_TOT_EQY
      {K::kNormal, 3.5, 0.8},       // analyst_ratio
      {K::kNormal, 5.0, 8.0},       // revenue_growth_5y_cagr
      {K::kNormal, 9.0, 8.0},       // profit_margin
      {K::kNormal, 13.0, 9.0},      // operating_margin
      {K::kNormal, 12.0, 10.0},     // return_on_equity
      {K::kNormal, 5.0, 5.0},       // return_on_assets
      {K::kLogNormal, 2.4, 0.45},   // ev_to_ebitda
      {K::kNormal, 4.0, 4.0},       // free_cash_flow_yield
      {K::kLogNormal, -0.5, 0.6},   // asset_turnover
      {K::kLogNormal, 3.7, 0.8},    // history_price
  }};
  return m;
}

struct Interaction {
  std::string a;
  std::string b;
  double weight = 0.0;
};

// The one-year log return of each row is
//   log(1 + threshold) + offset + sum_i w_i z_i + sum_j v_j z_a z_b + noise_std * e
// with z the standard-normal drivers of the indicators and e ~ N(0, 1). With
// calibrate_median the offset is set from the generated rows so that exactly
// half of them reach the threshold (odd row counts: one fewer Good);
// otherwise offset = `intercept`.
struct SynthConfig {
  std::size_t n_stocks = 2269;
  Quarter first_quarter{2014, 3};
  Quarter last_quarter{2014, 4};
  std::map<std::string, double> signal_weights;
  double noise_std = 0.5;
  double missing_rate = 0.0;
  double threshold = 0.10;
  std::vector<Interaction> interactions;
  bool calibrate_median = true;
  double intercept = 0.0;

  std::size_t quarters() const {
    return last_quarter < first_quarter ? 0 : static_cast<std::size_t>(last_quarter.index() - first_quarter.index() + 1);
  }

  void validate() const {
    if (n_stocks < 1) throw ConfigError("n_stocks must be at least 1");
    if (quarters() == 0) throw ConfigError("quarter range is empty");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw ConfigError("missing_rate must lie in [0, 1)");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("noise_std must be non-negative");
    if (!(threshold > -1.0)) throw ConfigError("threshold must exceed -1");
    bool any = false;
    for (const auto& [id, w] : signal_weights) {
      if (!feature_position(id)) throw ConfigError("unknown signal feature '" + id + "'");
      if (!std::isfinite(w)) throw ConfigError("signal weight for '" + id + "' is not finite");
      any = any || w != 0.0;
    }
    if (!any) throw ConfigError("at least one signal weight must be nonzero");
    for (const auto& it : interactions) {
      if (!feature_position(it.a) || !feature_position(it.b)) {
        throw ConfigError("unknown interaction feature '" + it.a + "' or '" + it.b + "'");
      }
    }
  }
};

// Planted features and weights shared by the default profiles: the ten
// selected-set indicators plus history_price.
inline SynthConfig default_profile() {
  SynthConfig c;
  c.signal_weights = {
      {"book_value", 0.30},       {"market_cap", -0.30},      {"DIVIDEND_YIELD", 0.25},
      {"BEST_EPS", 0.30},         {"PE_RATIO", -0.30},        {"PX_TO_BOOK_RATIO", -0.25},
      {"BEST_DPS", 0.25},         {"CUR_RATIO", 0.25},        {"QUICK_RATIO", 0.25},
      {"TOT_DEBT_TO_TOT_EQY", -0.25}, {"history_price", -0.25},
  };
  c.interactions = {
      {"BEST_EPS", "PE_RATIO", 0.45},
      {"book_value", "PX_TO_BOOK_RATIO", 0.45},
      {"CUR_RATIO", "TOT_DEBT_TO_TOT_EQY", -0.45},
  };
  c.noise_std = 0.5;
  return c;
}

namespace detail {

struct PlantTerms {
  std::vector<std::pair<std::size_t, double>> linear;                  // (feature position, weight)
  std::vector<std::tuple<std::size_t, std::size_t, double>> products;  // (a, b, weight)

  explicit PlantTerms(const SynthConfig& c) {
    for (const auto& [id, w] : c.signal_weights) {
      if (w != 0.0) linear.emplace_back(*feature_position(id), w);
    }
    std::sort(linear.begin(), linear.end());
    for (const auto& it : c.interactions) {
      if (it.weight != 0.0) products.emplace_back(*feature_position(it.a), *feature_position(it.b), it.weight);
    }
  }

  double score(const std::array<double, kFeatureUniverse>& z) const {
    double s = 0.0;
    for (auto [p, w] : linear) s += w * z[p];
    for (auto [a, b, w] : products) s += w * z[a] * z[b];
    return s;
  }
};

// Midpoint of the two middle order statistics (the middle one for odd n).
// For even n exactly half of the values lie strictly above it.
inline double median_split(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2.0;
}

}  // namespace detail

inline std::string synthetic_ticker(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "SYN%05zu", i + 1);
  return buf;
}

// Deterministic in (config, seed). Each stock draws from its own stream
// derived from (seed, stock index); the draw order per row is 29 drivers,
// one noise variate, then 28 missingness uniforms.
inline std::vector<StockSnapshot> generate(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  const detail::PlantTerms plant(config);
  const auto& marginals = default_marginals();
  const std::size_t nq = config.quarters();

  std::vector<StockSnapshot> out;
  out.reserve(config.n_stocks * nq);
  std::vector<double> raw_returns;
  raw_returns.reserve(config.n_stocks * nq);

  for (std::size_t s = 0; s < config.n_stocks; ++s) {
    Rng rng(derive_seed(seed, s));
    const std::string ticker = synthetic_ticker(s);
    for (std::size_t q = 0; q < nq; ++q) {
      std::array<double, kFeatureUniverse> z{};
      for (auto& v : z) v = rng.normal();
      const double noise = rng.normal();
      StockSnapshot snap;
      snap.ticker = ticker;
      snap.quarter = config.first_quarter.plus(static_cast<int>(q));
      for (std::size_t i = 0; i < kIndicatorCount; ++i) {
        const bool masked = rng.uniform() < config.missing_rate;
        double v = marginals[i].value(z[i]);
        if (!masked && std::isfinite(v) && !is_missing(v)) snap.indicators[i] = v;
      }
      snap.history_price = marginals[kIndicatorCount].value(z[kIndicatorCount]);
      raw_returns.push_back(plant.score(z) + config.noise_std * noise);
      out.push_back(std::move(snap));
    }
  }

  const double offset = config.calibrate_median ? -detail::median_split(raw_returns) : config.intercept;
  const double base = std::log1p(config.threshold);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].future_price = out[i].history_price * std::exp(base + offset + raw_returns[i]);
  }
  return out;
}

struct BayesRate {
  double rate = 0.0;
  double standard_error = 0.0;
};

// Monte-Carlo accuracy of the classifier that knows the plant and predicts
// Good iff the noiseless log return reaches the threshold. Samples the plant
// directly; indicator values and missingness play no part.
inline BayesRate bayes_rate(const SynthConfig& config, std::size_t n_samples, std::uint64_t seed) {
  config.validate();
  if (n_samples < 1000) throw ConfigError("bayes_rate needs at least 1000 samples");
  const detail::PlantTerms plant(config);
  Rng rng(derive_seed(seed, "bayes_rate"));
  std::vector<double> clean(n_samples), noisy(n_samples);
  std::array<double, kFeatureUniverse> z{};
  std::vector<std::size_t> used;
  for (auto [p, w] : plant.linear) used.push_back(p);
  for (auto [a, b, w] : plant.products) {
    used.push_back(a);
    used.push_back(b);
  }
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (auto p : used) z[p] = rng.normal();
    clean[i] = plant.score(z);
    noisy[i] = clean[i] + config.noise_std * rng.normal();
  }
  const double offset = config.calibrate_median ? -detail::median_split(noisy) : config.intercept;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    agree += (clean[i] + offset >= 0.0) == (noisy[i] + offset >= 0.0);
  }
  BayesRate r;
  r.rate = static_cast<double>(agree) / static_cast<double>(n_samples);
  r.standard_error = std::sqrt(r.rate * (1.0 - r.rate) / static_cast<double>(n_samples));
  return r;
}

}  // namespace equity

#pragma once

#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "equity/equity.hpp"

namespace equity::testing {

struct Row {
  std::vector<double> values;
  Label label;
};

// Dataset over the given feature ids; rows get tickers T0, T1, ... in 2014Q4.
inline LabeledDataset make_dataset(std::initializer_list<std::string_view> ids, const std::vector<Row>& rows) {
  LabeledDataset ds;
  ds.features = FeatureSet::make(ids);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.examples.push_back(LabeledExample{rows[i].values, rows[i].label, Provenance{"T" + std::to_string(i), {2014, 4}}});
  }
  return ds;
}

inline StockSnapshot snapshot(std::string ticker, Quarter q, double price) {
  StockSnapshot s;
  s.ticker = std::move(ticker);
  s.quarter = q;
  s.history_price = price;
  return s;
}

// Small labeled dataset from the default synthetic profile.
inline LabeledDataset synthetic_dataset(std::size_t stocks, std::uint64_t seed, double missing_rate = 0.0) {
  auto c = default_profile();
  c.n_stocks = stocks;
  c.missing_rate = missing_rate;
  const auto snaps = generate(c, seed);
  return balance(build_dataset(snaps, FeatureSet::all()).dataset, seed);
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("equity_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

inline CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "equity");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_pipeline(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace equity::testing

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "support.hpp"

using namespace equity;
using equity::testing::run_cli;
using equity::testing::TempDir;

namespace {

// Monte-Carlo Bayes rate of default_profile(), 2e6 samples, seed 1.
constexpr double kDefaultProfileBayesRate = 0.8624;

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LabeledDataset default_dataset(std::uint64_t seed, double missing_rate = 0.0, std::size_t stocks = 0) {
  auto c = default_profile();
  c.missing_rate = missing_rate;
  if (stocks) c.n_stocks = stocks;
  return balance(build_dataset(generate(c, seed), FeatureSet::all()).dataset, seed);
}

EvalReport evaluate(Algorithm a, const LabeledDataset& ds, std::uint64_t seed, Hyperparameters hp = {}) {
  return cross_validate(LearnerSpec::make(a, std::move(hp), seed), ds, 10, seed, worker_threads());
}

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

std::vector<EvalReport> rf_clean;  // filled by criterion 1, reused by 2 and 8

void criterion_1() {
  int passing = 0;
  std::string scores;
  for (auto s : kSeeds) {
    const auto ds = default_dataset(s);
    rf_clean.push_back(evaluate(Algorithm::kRandomForest, ds, s));
    const double f = rf_clean.back().metrics.f_score;
    passing += f >= 0.75;
    scores += fmt(" %.3f", f);
    if (s == 1 && ds.size() != 4538) {
      report(1, false, fmt("seed 1 has %zu rows, expected 4538", ds.size()));
      return;
    }
  }

  // end-to-end through the command line, timed
  TempDir dir;
  const auto t0 = std::chrono::steady_clock::now();
  const auto threads = std::to_string(worker_threads());
  auto r = run_cli({"synth", "--seed", "1", "--output", dir.file("snaps.csv")});
  if (r.code == 0) {
    r = run_cli({"evaluate", "--input", dir.file("snaps.csv"), "--algo", "random_forest", "--seed", "1", "--threads",
                 threads, "--output", dir.file("report.json")});
  }
  const double elapsed = seconds_since(t0);
  double cli_f = 0.0;
  if (r.code == 0) {
    const auto j = nlohmann::json::parse(read_file(dir.file("report.json")));
    cli_f = j["reports"][0]["f_score"].get<double>();
  }

  const auto bayes = bayes_rate(default_profile(), 1000000, 1);
  const bool bayes_ok = std::fabs(bayes.rate - kDefaultProfileBayesRate) <= 4 * bayes.standard_error + 1e-4 &&
                        std::fabs(kDefaultProfileBayesRate - 0.85) <= 0.02;

  report(1, passing >= 4 && r.code == 0 && cli_f >= 0.75 && elapsed < 120 && bayes_ok,
         fmt("RF F by seed:%s (%d/5 >= 0.75); CLI run F %.3f in %.1fs; Bayes rate %.4f (committed %.4f)",
             scores.c_str(), passing, cli_f, elapsed, bayes.rate, kDefaultProfileBayesRate));
}

void criterion_2() {
  const Algorithm others[] = {Algorithm::kRandomTree, Algorithm::kNaiveBayes, Algorithm::kLogistic};
  double margin_sum[3] = {0, 0, 0};
  int significant = 0;
  for (std::size_t i = 0; i < std::size(kSeeds); ++i) {
    const auto s = kSeeds[i];
    const auto ds = default_dataset(s);
    const auto& rf = rf_clean[i];
    for (int a = 0; a < 3; ++a) {
      const auto other = evaluate(others[a], ds, s);
      margin_sum[a] += rf.metrics.f_score - other.metrics.f_score;
      if (a == 0) significant += paired_t_test(rf.fold_f_scores, other.fold_f_scores).significant;
    }
  }
  bool ok = significant >= 4;
  std::string detail;
  for (int a = 0; a < 3; ++a) {
    const double m = margin_sum[a] / std::size(kSeeds);
    ok = ok && m >= 0.03;
    detail += fmt("RF - %s %+.3f; ", std::string(algorithm_id(others[a])).c_str(), m);
  }
  report(2, ok, detail + fmt("RF vs random_tree significant in %d/5 seeds", significant));
}

void criterion_3() {
  bool ok = true;
  std::string detail;
  for (auto a : kAllAlgorithms) {
    double sum = 0.0;
    for (auto s : kSeeds) {
      auto ds = default_dataset(s);
      std::vector<Label> labels;
      for (const auto& e : ds.examples) labels.push_back(e.label);
      Rng rng(derive_seed(s, "permute"));
      rng.shuffle(std::span<Label>(labels));
      for (std::size_t i = 0; i < labels.size(); ++i) ds.examples[i].label = labels[i];
      sum += evaluate(a, ds, s).metrics.f_score;
    }
    const double mean = sum / std::size(kSeeds);
    ok = ok && mean >= 0.45 && mean <= 0.55;
    detail += fmt("%s %.3f; ", std::string(algorithm_id(a)).c_str(), mean);
  }
  report(3, ok, "permuted-label F: " + detail);
}

void criterion_4() {
  Rng rng(2024);
  int good_configs = 0;
  for (int i = 0; i < 20; ++i) {
    auto c = default_profile();
    c.n_stocks = 5 + rng.below(600);
    c.missing_rate = 0.4 * rng.uniform();
    c.noise_std = 2 * rng.uniform();
    c.threshold = -0.2 + 0.6 * rng.uniform();
    c.first_quarter = {2012, 1 + static_cast<int>(rng.below(4))};
    c.last_quarter = {2014, 1 + static_cast<int>(rng.below(4))};
    if (rng.uniform() < 0.5) {
      c.calibrate_median = false;
      c.intercept = rng.normal();
    }
    const auto built = build_dataset(generate(c, i), FeatureSet::all());
    const auto balanced = balance(built.dataset, i);
    const std::size_t m = std::min(built.dataset.count(Label::kGood), built.dataset.count(Label::kBad));
    good_configs += balanced.count(Label::kGood) == m && balanced.count(Label::kBad) == m;
  }
  report(4, good_configs == 20, fmt("%d/20 randomized configurations balanced to min class size", good_configs));
}

void criterion_5() {
  // split statistics: every labeling of n <= 8 rows, two value layouts, every threshold
  std::size_t checks = 0, mismatches = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int layout = 0; layout < 2; ++layout) {
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<std::pair<double, Label>> rows;
        std::vector<Label> labels;
        for (std::size_t i = 0; i < n; ++i) {
          const double v = layout == 0 ? double(i) : double(i / 2);
          const Label l = (mask >> i) & 1 ? Label::kGood : Label::kBad;
          rows.emplace_back(v, l);
          labels.push_back(l);
        }
        ClassCounts all;
        for (auto l : labels) all.add(l);
        if (std::fabs(entropy(all) - oracle::entropy_bits(labels)) > 1e-9) ++mismatches;
        ++checks;
        for (double t = -0.5; t < double(n); t += 1.0) {
          const auto s = partition(rows, t);
          const auto o = oracle::split_values(rows, t);
          if (std::fabs(s.information_gain() - o.gain) > 1e-9 || std::fabs(s.split_information() - o.split_info) > 1e-9 ||
              std::fabs(gain_ratio(rows, t) - o.ratio) > 1e-9) {
            ++mismatches;
          }
          ++checks;
        }
      }
    }
  }

  struct Expected {
    std::uint64_t tp, fp, fn, tn;
    double p, r, f;
  };
  const Expected matrices[] = {
      {50, 10, 5, 35, 409.0 / 480, 17.0 / 20, 3319.0 / 3910},
      {1, 0, 0, 1, 1.0, 1.0, 1.0},
      {3, 1, 2, 4, 17.0 / 24, 7.0 / 10, 23.0 / 33},
      {0, 0, 10, 10, 1.0 / 4, 1.0 / 2, 1.0 / 3},
      {10, 10, 0, 0, 1.0 / 4, 1.0 / 2, 1.0 / 3},
      {7, 3, 3, 7, 7.0 / 10, 7.0 / 10, 7.0 / 10},
      {100, 20, 30, 50, 73.0 / 96, 3.0 / 4, 113.0 / 150},
      {1, 2, 3, 4, 10.0 / 21, 1.0 / 2, 44.0 / 91},
      {649, 0, 0, 649, 1.0, 1.0, 1.0},
      {12, 5, 9, 21, 2807.0 / 3995, 33.0 / 47, 1245.0 / 1786},
  };
  int prf_ok = 0;
  for (const auto& e : matrices) {
    ConfusionMatrix cm;
    cm.tp = e.tp;
    cm.fp = e.fp;
    cm.fn = e.fn;
    cm.tn = e.tn;
    const auto w = weighted_prf(cm);
    prf_ok += std::fabs(w.precision - e.p) <= 1e-12 && std::fabs(w.recall - e.r) <= 1e-12 &&
              std::fabs(w.f_score - e.f) <= 1e-12;
  }

  int t_ok = 0;
  for (int v = 0; v < 10; ++v) {
    std::vector<double> a, b;
    for (int i = 0; i < 10; ++i) {
      a.push_back(0.75 + 0.03 * std::sin(1.3 * i + v) + 0.004 * v);
      b.push_back(0.73 + 0.03 * std::cos(0.7 * i * (v + 1)));
    }
    const auto r = paired_t_test(a, b);
    const auto o = oracle::paired_t(a, b);
    t_ok += std::fabs(r.t - o.t) <= 1e-9 && std::fabs(r.p - o.p) <= 1e-9;
  }
  report(5, mismatches == 0 && prf_ok == 10 && t_ok == 10,
         fmt("split statistics %zu/%zu match; weighted P/R/F %d/10; paired t-test %d/10", checks - mismatches, checks,
             prf_ok, t_ok));
}

void criterion_6() {
  const auto planted = default_profile().signal_weights;
  int retained_runs = 0;
  bool monotone = true;
  std::string detail;
  for (auto s : kSeeds) {
    const auto ds = default_dataset(s, 0.0, 800);
    const auto r = backward_eliminate(ds, LearnerSpec::make(Algorithm::kRandomForest, {{"trees", 20}}, s), 10, s,
                                      worker_threads());
    int kept = 0;
    for (const auto& [id, w] : planted) kept += r.selected.contains(id);
    retained_runs += kept >= 9;
    monotone = monotone && r.final_score >= r.initial_score;
    detail += fmt(" %d/11 (%.3f->%.3f)", kept, r.initial_score, r.final_score);
  }
  report(6, retained_runs >= 4 && monotone,
         fmt("planted features kept by seed:%s; %d/5 runs keep >= 9", detail.c_str(), retained_runs));
}

void criterion_7() {
  TempDir dir;
  const auto snaps = dir.file("snaps.csv");
  bool ok = run_cli({"synth", "--n-stocks", "300", "--missing-rate", "0.1", "--seed", "7", "--output", snaps}).code == 0;
  std::string files[2][3];
  const char* threads[] = {"1", "8"};
  for (int t = 0; t < 2 && ok; ++t) {
    const std::string tag = threads[t];
    const auto rf = dir.file("rf" + tag + ".json"), tree = dir.file("tree" + tag + ".json");
    const auto eval = dir.file("eval" + tag + ".json");
    ok = ok &&
         run_cli({"train", "--input", snaps, "--algo", "random_forest", "--hp", "trees=30", "--seed", "7", "--threads",
                  tag, "--output", rf})
                 .code == 0 &&
         run_cli({"train", "--input", snaps, "--algo", "c45_tree", "--seed", "7", "--threads", tag, "--output", tree})
                 .code == 0 &&
         run_cli({"evaluate", "--input", snaps, "--algo", "random_forest,random_tree,naive_bayes,logistic", "--seed",
                  "7", "--threads", tag, "--output", eval})
                 .code == 0;
    if (ok) {
      files[t][0] = read_file(rf);
      files[t][1] = read_file(tree);
      files[t][2] = read_file(eval);
    }
  }
  int identical = 0;
  for (int i = 0; i < 3 && ok; ++i) identical += !files[0][i].empty() && files[0][i] == files[1][i];
  report(7, ok && identical == 3, fmt("%d/3 artifacts byte-identical at --threads 1 and 8", identical));
}

// Split thresholds of every tree in a serialized model.
std::vector<double> serialized_thresholds(const Model& m) {
  const auto j = model_to_json(m);
  std::vector<double> out;
  auto scan = [&](const nlohmann::json& nodes) {
    for (const auto& n : nodes) {
      if (n.size() == 5) out.push_back(n[1].get<double>());
    }
  };
  const auto& p = j["parameters"];
  if (p.contains("nodes")) scan(p["nodes"]);
  if (p.contains("trees")) {
    for (const auto& t : p["trees"]) scan(t);
  }
  return out;
}

void criterion_8() {
  double clean = 0.0, missing = 0.0;
  std::size_t thresholds = 0, sentinels = 0;
  for (std::size_t i = 0; i < std::size(kSeeds); ++i) {
    const auto s = kSeeds[i];
    clean += rf_clean[i].metrics.f_score;
    const auto ds = default_dataset(s, 0.2);
    missing += evaluate(Algorithm::kRandomForest, ds, s).metrics.f_score;
    if (s == 1) {
      for (auto a : {Algorithm::kC45Tree, Algorithm::kRandomTree, Algorithm::kRandomForest}) {
        for (double t : serialized_thresholds(train(LearnerSpec::make(a, {}, s), ds))) {
          ++thresholds;
          sentinels += t == kMissing;
        }
      }
    }
  }
  clean /= std::size(kSeeds);
  missing /= std::size(kSeeds);
  report(8, clean - missing < 0.10 && sentinels == 0 && thresholds > 0,
         fmt("RF F %.3f at missing rate 0 vs %.3f at 0.2 (drop %.3f); %zu/%zu serialized thresholds equal -9999", clean,
             missing, clean - missing, sentinels, thresholds));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::function<void()>> criteria = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                       criterion_5, criterion_6, criterion_7, criterion_8};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("criterion run aborted: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d criteria failed; %.0fs total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}

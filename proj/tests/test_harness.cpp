#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "clspfreq/harness.hpp"

using namespace clspfreq;
using cd = std::complex<double>;

namespace {

const PeriodicSignal kSine(0.25, {0.0, cd{0.0, -0.5}});

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.signal = PeriodicSignal(0.25, {0.1, cd{0.0, -0.5}, cd{0.1, 0.05}});
  cfg.n = 150;
  cfg.snr_db = 10.0;
  cfg.grid = FrequencyGrid(0.23, 0.27, 2e-4);
  cfg.methods = {{Method::clsp, 2}, {Method::ls, 2}};
  cfg.replicates = 12;
  cfg.base_seed = 77;
  return cfg;
}

void expect_same_stats(const ExperimentResult &a, const ExperimentResult &b) {
  ASSERT_EQ(a.stats.size(), b.stats.size());
  for (std::size_t m = 0; m < a.stats.size(); ++m) {
    EXPECT_EQ(a.stats[m].bias, b.stats[m].bias);
    EXPECT_EQ(a.stats[m].sd, b.stats[m].sd);
    EXPECT_EQ(a.stats[m].rmse, b.stats[m].rmse);
    EXPECT_EQ(a.stats[m].failures, b.stats[m].failures);
    EXPECT_EQ(a.stats[m].per_replicate, b.stats[m].per_replicate);
  }
  EXPECT_EQ(a.checksums, b.checksums);
}

} // namespace

TEST(Seeds, MixingIsFixed) {
  EXPECT_EQ(replicate_seed(0, 0), splitmix64(0));
  EXPECT_EQ(replicate_seed(5, 3), 5 ^ splitmix64(3));
  EXPECT_NE(noise_seed(1), noise_seed(2));
  EXPECT_NE(noise_seed(1), 1u);
}

TEST(RunExperiment, DeterministicAcrossRunsAndThreads) {
  auto cfg = small_config();
  const auto a = run_experiment(cfg);
  expect_same_stats(a, run_experiment(cfg));
  for (unsigned t : {2u, 5u}) {
    cfg.threads = t;
    expect_same_stats(a, run_experiment(cfg));
  }
}

TEST(RunExperiment, ReplicateIndependentOfReplicateCount) {
  auto cfg = small_config();
  const auto full = run_experiment(cfg);
  cfg.replicates = 5;
  cfg.threads = 3;
  const auto part = run_experiment(cfg);
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_EQ(part.checksums[r], full.checksums[r]);
    for (std::size_t m = 0; m < 2; ++m)
      EXPECT_EQ(part.stats[m].per_replicate[r], full.stats[m].per_replicate[r]);
  }
}

TEST(RunExperiment, MethodsShareReplicateData) {
  const auto cfg = small_config();
  const auto res = run_experiment(cfg);
  const double sigma = resolve_sigma(cfg);
  ASSERT_EQ(res.checksums.size(), cfg.replicates);
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    const auto data = make_replicate(cfg, sigma, r);
    EXPECT_EQ(res.checksums[r], data.checksum());
    EXPECT_EQ(res.stats[0].per_replicate[r],
              estimate_clsp(data, cfg.grid, 2).f_hat);
    EXPECT_EQ(res.stats[1].per_replicate[r], estimate_ls(data, cfg.grid, 2).f_hat);
  }
}

TEST(RunExperiment, StatisticsInvariants) {
  const auto res = run_experiment(small_config());
  for (const auto &s : res.stats) {
    EXPECT_GE(s.sd, 0.0);
    EXPECT_EQ(s.failures + s.successes, 12u);
    double mean = 0.0;
    for (double v : s.per_replicate) mean += v;
    mean /= 12.0;
    EXPECT_NEAR(s.bias, mean - 0.25, 1e-15);
    EXPECT_NEAR(s.rmse * s.rmse, s.bias * s.bias + s.sd * s.sd * 11.0 / 12.0, 1e-14);
  }
  ASSERT_TRUE(res.theory.has_value());
  EXPECT_EQ(res.f0, 0.25);
}

TEST(RunExperiment, SingleNoiselessReplicate) {
  ExperimentConfig cfg;
  cfg.signal = kSine;
  cfg.n = 20000;
  cfg.sigma = 0.0;
  cfg.grid = FrequencyGrid(0.249, 0.251, 1e-5);
  cfg.methods = {{Method::clsp, 1}, {Method::ls, 1}};
  cfg.replicates = 1;
  const auto res = run_experiment(cfg);
  for (const auto &s : res.stats) {
    EXPECT_LE(std::abs(s.bias), cfg.grid.mesh());
    EXPECT_EQ(s.sd, 0.0);
  }
  EXPECT_FALSE(res.theory.has_value());
  EXPECT_FALSE(res.warnings.empty());
}

TEST(RunExperiment, SubMultipleTarget) {
  auto cfg = small_config();
  cfg.signal = PeriodicSignal(0.5, {0.0, cd{0.2, -0.3}, cd{0.1, 0.1}});
  cfg.grid = FrequencyGrid(0.2, 0.3, 1e-4);
  cfg.methods = {{Method::clsp, 2}};
  const auto res = run_experiment(cfg);
  EXPECT_EQ(res.ell, 2);
  EXPECT_EQ(res.f0, 0.25);
  EXPECT_NEAR(predicted_clsp_sd(*res.theory, res.n, res.ell),
              predicted_clsp_sd(*res.theory, res.n) / 2, 1e-18);
  std::vector<std::string> w;
  EXPECT_EQ(resolve_ell(1.0, FrequencyGrid(0.2, 0.52, 1e-3), &w), 2);
  EXPECT_EQ(w.size(), 1u);
}

TEST(RunExperiment, TheoryAgreesWithSimulation) {
  ExperimentConfig cfg;
  cfg.signal = kSine;
  cfg.n = 600;
  cfg.snr_db = 10.0;
  cfg.grid = FrequencyGrid(0.24, 0.26, 5e-5);
  cfg.methods = {{Method::clsp, 1}};
  cfg.replicates = 200;
  cfg.refine = true;
  cfg.base_seed = 2024;
  const auto res = run_experiment(cfg);
  const double pred = predicted_clsp_sd(*res.theory, 600);
  EXPECT_NEAR(res.stats[0].sd / pred, 1.0, 0.3) << res.stats[0].sd << " vs " << pred;
  // Bias is negligible next to the spread.
  EXPECT_LE(std::abs(res.stats[0].bias),
            2 * res.stats[0].sd / std::sqrt(200.0) + cfg.grid.mesh());
}

TEST(RunExperiment, RejectsInvalidConfigs) {
  auto cfg = small_config();
  cfg.replicates = 0;
  EXPECT_THROW(run_experiment(cfg), config_error);
  cfg = small_config();
  cfg.methods.clear();
  EXPECT_THROW(run_experiment(cfg), config_error);
  cfg = small_config();
  cfg.methods = {{Method::ls, 100}};
  EXPECT_THROW(run_experiment(cfg), config_error);
  cfg = small_config();
  cfg.sigma = 0.1;
  EXPECT_THROW(run_experiment(cfg), config_error);
  cfg = small_config();
  cfg.snr_db.reset();
  EXPECT_THROW(run_experiment(cfg), config_error);
  cfg = small_config();
  cfg.grid = FrequencyGrid(0.3, 0.4, 1e-3);
  EXPECT_THROW(run_experiment(cfg), config_error);
  cfg = small_config();
  cfg.signal = PeriodicSignal(0.25, {1.0});
  cfg.snr_db.reset();
  cfg.sigma = 0.1;
  EXPECT_THROW(run_experiment(cfg), config_error);
}

TEST(PhaseFold, Examples) {
  const TimeSeries ts({0.5, 1.0, 2.5}, {1.0, 2.0, 3.0});
  const auto same = phase_fold(ts, 10.0);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(same[j].first, ts.times()[j]);
    EXPECT_EQ(same[j].second, ts.values()[j]);
  }
  std::vector<double> x, y;
  for (int j = 1; j <= 8; ++j) {
    x.push_back(j * 1.5);
    y.push_back(j);
  }
  const auto alt = phase_fold(TimeSeries(x, y), 3.0);
  for (std::size_t j = 0; j < alt.size(); ++j) {
    EXPECT_TRUE(alt[j].first == 0.0 || alt[j].first == 1.5);
    EXPECT_GE(alt[j].first, 0.0);
    EXPECT_LT(alt[j].first, 3.0);
    if (j > 0) {
      EXPECT_LE(alt[j - 1].first, alt[j].first);
    }
  }
  EXPECT_THROW(phase_fold(ts, 0.0), config_error);
}

TEST(PhaseFold, FitRoundTrip) {
  const PeriodicSignal s(1.0 / 3.9861, {0.2, cd{0.3, -0.1}, cd{-0.05, 0.08}, cd{0.02, 0.01}});
  const auto ts = observe(s, sample_instants(RenewalScheme::exponential(5.0), 400, 3), 0.0, 0);
  const auto folded = phase_fold(ts, 3.9861);
  std::vector<double> ph, v;
  for (const auto &[p, y] : folded) {
    ph.push_back(p);
    v.push_back(y);
  }
  const auto fit = fit_trig_poly(ph, v, s.f_star(), 3);
  for (int k = 0; k <= 3; ++k) EXPECT_NEAR(std::abs(fit.coeff(k) - s.coeff(k)), 0.0, 1e-8);
}

TEST(ReportTable, CsvRoundTripAndHeader) {
  auto cfg = small_config();
  cfg.methods = {{Method::clsp, 2}};
  auto res = run_experiment(cfg);
  const auto one = report_table(res);
  std::istringstream lines(one.csv);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 2);

  res = run_experiment(small_config());
  const auto table = report_table(res);
  const auto parsed = parse_stats_csv(table.csv);
  ASSERT_EQ(parsed.size(), res.stats.size());
  for (std::size_t m = 0; m < parsed.size(); ++m) {
    EXPECT_EQ(parsed[m].method, res.stats[m].method);
    EXPECT_EQ(parsed[m].K, res.stats[m].K);
    EXPECT_EQ(parsed[m].bias, res.stats[m].bias);
    EXPECT_EQ(parsed[m].sd, res.stats[m].sd);
    EXPECT_EQ(parsed[m].rmse, res.stats[m].rmse);
    EXPECT_EQ(parsed[m].failures, res.stats[m].failures);
    EXPECT_EQ(parsed[m].successes, res.stats[m].successes);
  }
  // The optimal_sd column and the text header both come from the report.
  std::istringstream rows(table.csv);
  std::getline(rows, line);
  std::getline(rows, line);
  const double opt = std::stod(line.substr(line.rfind(',', line.rfind(',') - 1) + 1));
  EXPECT_EQ(opt, optimal_sd(*res.theory, res.n));
  std::ostringstream want;
  want << std::scientific << std::setprecision(3) << optimal_sd(*res.theory, res.n);
  EXPECT_NE(table.text.find("Optimal SD"), std::string::npos);
  EXPECT_NE(table.text.find(want.str()), std::string::npos);
  EXPECT_NE(table.text.find("CP2"), std::string::npos);
  EXPECT_NE(table.text.find("LS2"), std::string::npos);
  EXPECT_THROW(parse_stats_csv("bad\n"), data_error);
  EXPECT_THROW(report_table(ExperimentResult{}), config_error);
}

TEST(ConfigJson, ParsesAndValidates) {
  const auto j = nlohmann::json::parse(R"({
    "signal": {"f_star": 0.25, "coeffs": [{"k": 1, "re": 0.0, "im": -0.5}]},
    "scheme": {"law": "gamma", "shape": 2.0, "rate": 10.0},
    "n": 200, "snr_db": 10,
    "grid": {"f_min": 0.2, "f_max": 0.3, "mesh": 1e-4},
    "methods": [{"method": "clsp", "K": 1}, {"method": "ls", "K": 2}],
    "replicates": 7, "base_seed": 9, "refine": true
  })");
  const auto cfg = config_from_json(j);
  EXPECT_EQ(cfg.n, 200u);
  EXPECT_EQ(cfg.methods.size(), 2u);
  EXPECT_EQ(cfg.methods[1].method, Method::ls);
  EXPECT_EQ(cfg.replicates, 7u);
  EXPECT_TRUE(cfg.refine);
  EXPECT_FALSE(cfg.scheme.is_exponential());
  EXPECT_EQ(cfg.grid.size(), 1001u);

  auto bad = j;
  bad.erase("methods");
  EXPECT_THROW(config_from_json(bad), config_error);
  bad = j;
  bad.erase("signal");
  EXPECT_THROW(config_from_json(bad), config_error);
  bad = j;
  bad["signal_file"] = "/nonexistent/signal.json";
  bad.erase("signal");
  EXPECT_THROW(config_from_json(bad), data_error);
}

TEST(ConfigJson, ReferenceSignalFile) {
  const auto j = nlohmann::json::parse(R"({
    "signal_file": "reference_signal.json", "n": 300, "sigma": 0.07,
    "methods": [{"method": "clsp", "K": 4}]
  })");
  const auto cfg = config_from_json(j, CLSPFREQ_DATA_DIR);
  EXPECT_EQ(cfg.signal.degree(), 6);
  EXPECT_NEAR(ac_power(cfg.signal), 0.049, 1e-12);
}

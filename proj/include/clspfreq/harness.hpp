#ifndef CLSPFREQ_HARNESS_HPP
#define CLSPFREQ_HARNESS_HPP

// Monte-Carlo experiments: simulate replicates, run every (method, K) pair
// on the same data, aggregate bias and SD, attach the asymptotic theory.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "sampling.hpp"
#include "signal.hpp"

namespace clspfreq {

struct MethodSpec {
  Method method = Method::clsp;
  int K = 1;
};

struct ExperimentConfig {
  PeriodicSignal signal;
  RenewalScheme scheme = RenewalScheme::exponential(5.0);
  std::size_t n = 300;
  /// Exactly one of sigma and snr_db must be set.
  std::optional<double> sigma;
  std::optional<double> snr_db;
  FrequencyGrid grid{0.2, 0.52, 5e-5};
  std::vector<MethodSpec> methods;
  std::size_t replicates = 100;
  std::uint64_t base_seed = 0;
  bool refine = false;
  unsigned threads = 1;
  bool keep_per_replicate = true;
};

struct MethodStats {
  Method method = Method::clsp;
  int K = 1;
  double bias = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  std::size_t failures = 0;
  std::size_t successes = 0;
  /// f_hat per replicate, NaN where the estimator failed.
  std::vector<double> per_replicate;
};

struct ExperimentResult {
  std::vector<MethodStats> stats;
  std::optional<AsymptoticReport> theory;
  std::size_t n = 0;
  double sigma = 0.0;
  std::optional<double> snr_db;
  double f0 = 0.0;
  int ell = 1;
  std::vector<std::uint64_t> checksums;
  std::vector<std::string> warnings;
};

/// Seed of replicate r: base_seed XOR splitmix64(r).
constexpr std::uint64_t replicate_seed(std::uint64_t base_seed,
                                       std::uint64_t r) noexcept {
  return base_seed ^ splitmix64(r);
}

/// Noise stream seed derived from a replicate seed ("noise" tag).
constexpr std::uint64_t noise_seed(std::uint64_t rep_seed) noexcept {
  return splitmix64(rep_seed ^ 0x6E6F697365ULL);
}

inline double resolve_sigma(const ExperimentConfig &cfg) {
  if (cfg.sigma.has_value() == cfg.snr_db.has_value())
    throw config_error("experiment: set exactly one of sigma and snr_db");
  if (cfg.sigma) {
    if (!(*cfg.sigma >= 0.0) || !std::isfinite(*cfg.sigma))
      throw config_error("experiment: sigma must be >= 0");
    return *cfg.sigma;
  }
  return snr_to_sigma(cfg.signal, *cfg.snr_db);
}

/// Sub-multiple index ell with f_min <= f* / ell <= f_max. If several
/// qualify the smallest is used and a warning recorded.
inline int resolve_ell(double f_star, const FrequencyGrid &grid,
                       std::vector<std::string> *warnings = nullptr) {
  const auto lo = static_cast<long>(std::ceil(f_star / grid.f_max() - 1e-12));
  const auto hi = static_cast<long>(std::floor(f_star / grid.f_min() + 1e-12));
  const long first = std::max(lo, 1L);
  if (first > hi)
    throw config_error("experiment: no sub-multiple f*/l lies in the band");
  if (hi > first && warnings)
    warnings->push_back("band contains several sub-multiples f*/l (l = " +
                        std::to_string(first) + ".." + std::to_string(hi) +
                        "); using l = " + std::to_string(first));
  return static_cast<int>(first);
}

inline void validate(const ExperimentConfig &cfg) {
  if (cfg.replicates < 1) throw config_error("experiment: replicates must be >= 1");
  if (cfg.n < 1) throw config_error("experiment: n must be >= 1");
  if (cfg.methods.empty()) throw config_error("experiment: no methods");
  for (const auto &m : cfg.methods) {
    if (m.K < 1) throw config_error("experiment: K must be >= 1");
    if (m.method == Method::ls && cfg.n < static_cast<std::size_t>(2 * m.K + 1))
      throw config_error("experiment: LS with K=" + std::to_string(m.K) +
                         " needs n >= 2K+1");
  }
  if (cfg.signal.is_constant())
    throw config_error("experiment: signal is constant");
  resolve_sigma(cfg);
  resolve_ell(cfg.signal.f_star(), cfg.grid);
}

/// Simulated data set of replicate r.
inline TimeSeries make_replicate(const ExperimentConfig &cfg, double sigma,
                                 std::size_t r) {
  const auto seed = replicate_seed(cfg.base_seed, r);
  return observe(cfg.signal, sample_instants(cfg.scheme, cfg.n, seed), sigma,
                 noise_seed(seed));
}

inline ExperimentResult run_experiment(const ExperimentConfig &cfg) {
  validate(cfg);
  ExperimentResult res;
  res.n = cfg.n;
  res.sigma = resolve_sigma(cfg);
  res.snr_db = cfg.snr_db;
  res.ell = resolve_ell(cfg.signal.f_star(), cfg.grid, &res.warnings);
  res.f0 = cfg.signal.f_star() / res.ell;
  if (res.sigma > 0.0)
    res.theory = clsp_variance(cfg.signal, cfg.scheme, res.sigma);
  else
    res.warnings.push_back("sigma = 0: asymptotic theory not defined");
  if (cfg.grid.mesh() > 0.5 * cfg.grid.f_min())
    res.warnings.push_back("mesh is coarse relative to the band");

  const std::size_t R = cfg.replicates, M = cfg.methods.size();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> est(R * M, nan);
  res.checksums.assign(R, 0);
  parallel_for(R, cfg.threads, [&](std::size_t r) {
    const TimeSeries data = make_replicate(cfg, res.sigma, r);
    res.checksums[r] = data.checksum();
    for (std::size_t m = 0; m < M; ++m) {
      try {
        est[r * M + m] = estimate(data, cfg.grid, cfg.methods[m].method,
                                  cfg.methods[m].K, cfg.refine, 1)
                             .f_hat;
      } catch (const numerical_error &) {
      }
    }
  });

  for (std::size_t m = 0; m < M; ++m) {
    MethodStats s;
    s.method = cfg.methods[m].method;
    s.K = cfg.methods[m].K;
    double sum = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const double v = est[r * M + m];
      if (std::isnan(v)) {
        ++s.failures;
        continue;
      }
      ++s.successes;
      sum += v;
    }
    if (s.successes > 0) {
      const double mean = sum / s.successes;
      double ss = 0.0, se = 0.0;
      for (std::size_t r = 0; r < R; ++r) {
        const double v = est[r * M + m];
        if (std::isnan(v)) continue;
        ss += (v - mean) * (v - mean);
        se += (v - res.f0) * (v - res.f0);
      }
      s.bias = mean - res.f0;
      s.sd = s.successes > 1 ? std::sqrt(ss / (s.successes - 1)) : 0.0;
      s.rmse = std::sqrt(se / s.successes);
    } else {
      s.bias = s.sd = s.rmse = nan;
    }
    if (cfg.keep_per_replicate)
      for (std::size_t r = 0; r < R; ++r) s.per_replicate.push_back(est[r * M + m]);
    res.stats.push_back(std::move(s));
  }
  return res;
}

/// (X_j mod period, Y_j) sorted by phase; equal phases keep input order.
inline std::vector<std::pair<double, double>> phase_fold(const TimeSeries &data,
                                                         double period) {
  if (!(period > 0.0) || !std::isfinite(period))
    throw config_error("phase_fold: period must be > 0");
  std::vector<std::pair<double, double>> out(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    double ph = std::fmod(data.times()[j], period);
    if (ph < 0.0) ph += period;
    if (ph >= period) ph = 0.0;
    out[j] = {ph, data.values()[j]};
  }
  std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
    return a.first < b.first;
  });
  return out;
}

// Reporting

inline std::string method_label(Method m, int K) {
  return (m == Method::ls ? "LS" : "CP") + std::to_string(K);
}

struct ReportTable {
  std::string csv;
  std::string text;
};

inline constexpr const char *kStatsCsvHeader =
    "method,K,n,f0,bias,sd,rmse,failures,successes,optimal_sd,predicted_clsp_sd";

inline ReportTable report_table(const ExperimentResult &res) {
  if (res.stats.empty()) throw config_error("report_table: no statistics");
  const double opt =
      res.theory ? optimal_sd(*res.theory, res.n)
                 : std::numeric_limits<double>::quiet_NaN();
  const double pred =
      res.theory ? predicted_clsp_sd(*res.theory, res.n, res.ell)
                 : std::numeric_limits<double>::quiet_NaN();

  std::ostringstream csv;
  csv << std::setprecision(17) << kStatsCsvHeader << '\n';
  for (const auto &s : res.stats)
    csv << to_string(s.method) << ',' << s.K << ',' << res.n << ',' << res.f0
        << ',' << s.bias << ',' << s.sd << ',' << s.rmse << ',' << s.failures
        << ',' << s.successes << ',' << opt << ',' << pred << '\n';

  std::ostringstream txt;
  txt << "n=" << res.n;
  if (res.snr_db) txt << ", SNR=" << *res.snr_db << "dB";
  txt << ", sigma=" << std::setprecision(4) << res.sigma << ", f0=" << res.f0
      << '\n';
  txt << std::scientific << std::setprecision(3);
  txt << std::left << std::setw(20) << "Optimal SD" << opt << '\n';
  txt << std::left << std::setw(20) << "CLSP SD (theory)" << pred << '\n';
  txt << std::left << std::setw(8) << "Method" << std::right << std::setw(12)
      << "Bias" << std::setw(12) << "SD" << std::setw(12) << "RMSE"
      << std::setw(10) << "Failures" << '\n';
  for (const auto &s : res.stats)
    txt << std::left << std::setw(8) << method_label(s.method, s.K)
        << std::right << std::setw(12) << s.bias << std::setw(12) << s.sd
        << std::setw(12) << s.rmse << std::setw(10) << s.failures << '\n';
  return {csv.str(), txt.str()};
}

/// Parses the statistics CSV written by report_table (per-replicate values
/// are not part of the format).
inline std::vector<MethodStats> parse_stats_csv(const std::string &csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kStatsCsvHeader)
    throw data_error("stats CSV: unexpected header");
  std::vector<MethodStats> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string tok; std::getline(ls, tok, ',');) f.push_back(tok);
    if (f.size() != 11) throw data_error("stats CSV: expected 11 fields");
    try {
      MethodStats s;
      s.method = parse_method(f[0]);
      s.K = std::stoi(f[1]);
      s.bias = std::stod(f[4]);
      s.sd = std::stod(f[5]);
      s.rmse = std::stod(f[6]);
      s.failures = std::stoull(f[7]);
      s.successes = std::stoull(f[8]);
      out.push_back(std::move(s));
    } catch (const std::logic_error &e) {
      throw data_error(std::string("stats CSV: ") + e.what());
    }
  }
  return out;
}

inline nlohmann::json to_json(const ExperimentResult &res) {
  nlohmann::json stats = nlohmann::json::array();
  for (const auto &s : res.stats)
    stats.push_back({{"method", to_string(s.method)},
                     {"K", s.K},
                     {"bias", s.bias},
                     {"sd", s.sd},
                     {"rmse", s.rmse},
                     {"failures", s.failures},
                     {"successes", s.successes}});
  nlohmann::json j{{"n", res.n},          {"sigma", res.sigma},
                   {"f0", res.f0},        {"ell", res.ell},
                   {"stats", stats},      {"warnings", res.warnings}};
  if (res.theory) {
    j["theory"] = to_json(*res.theory);
    j["optimal_sd"] = optimal_sd(*res.theory, res.n);
    j["predicted_clsp_sd"] = predicted_clsp_sd(*res.theory, res.n, res.ell);
  }
  return j;
}

/// Reads an experiment config. The signal is given inline ("signal"), as a
/// file ("signal_file"), or fitted from a light curve ("fit": {"light_curve",
/// "period", "degree"}). Relative paths resolve against `base_dir`.
inline ExperimentConfig config_from_json(const nlohmann::json &j,
                                         const std::string &base_dir = "") {
  auto resolve = [&](const std::string &p) {
    if (p.empty() || p.front() == '/' || base_dir.empty()) return p;
    return base_dir + "/" + p;
  };
  try {
    ExperimentConfig cfg;
    if (j.contains("signal")) {
      cfg.signal = signal_from_json(j.at("signal"));
    } else if (j.contains("signal_file")) {
      const auto path = resolve(j.at("signal_file").get<std::string>());
      std::ifstream in(path);
      if (!in) throw data_error("cannot open signal file '" + path + "'");
      cfg.signal = signal_from_json(nlohmann::json::parse(in));
    } else if (j.contains("fit")) {
      const auto &fit = j.at("fit");
      const auto lc =
          read_timeseries_csv(resolve(fit.at("light_curve").get<std::string>()));
      cfg.signal = fit_trig_poly(lc.times(), lc.values(),
                                 1.0 / fit.at("period").get<double>(),
                                 fit.at("degree").get<int>());
    } else {
      throw config_error("experiment: one of signal, signal_file, fit required");
    }
    if (j.contains("scheme")) cfg.scheme = scheme_from_json(j.at("scheme"));
    cfg.n = j.at("n").get<std::size_t>();
    if (j.contains("sigma")) cfg.sigma = j.at("sigma").get<double>();
    if (j.contains("snr_db")) cfg.snr_db = j.at("snr_db").get<double>();
    if (j.contains("grid")) {
      const auto &g = j.at("grid");
      cfg.grid = FrequencyGrid(g.at("f_min").get<double>(),
                               g.at("f_max").get<double>(),
                               g.at("mesh").get<double>());
    }
    for (const auto &m : j.at("methods"))
      cfg.methods.push_back(
          {parse_method(m.at("method").get<std::string>()), m.at("K").get<int>()});
    cfg.replicates = j.value("replicates", std::size_t{100});
    cfg.base_seed = j.value("base_seed", std::uint64_t{0});
    cfg.refine = j.value("refine", false);
    cfg.threads = j.value("threads", 1u);
    cfg.keep_per_replicate = j.value("keep_per_replicate", false);
    return cfg;
  } catch (const nlohmann::json::exception &e) {
    throw config_error(std::string("experiment config: ") + e.what());
  }
}

} // namespace clspfreq

#endif

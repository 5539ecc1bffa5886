// clspfreq: command-line front end.
//
//   simulate  signal JSON + renewal scheme -> TimeSeries CSV
//   fit       light curve + period + degree -> signal JSON
//   estimate  light curve -> JSON EstimateResult
//   theory    signal JSON + scheme + noise -> JSON AsymptoticReport
//   mc        ExperimentConfig JSON -> statistics CSV and text table
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clspfreq/clspfreq.hpp"

namespace cf = clspfreq;
using nlohmann::json;

namespace {

cf::PeriodicSignal load_signal(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw cf::data_error("cannot open signal file '" + path + "'");
  try {
    return cf::signal_from_json(json::parse(in));
  } catch (const json::parse_error &e) {
    throw cf::data_error("signal file '" + path + "': " + e.what());
  }
}

double noise_sigma(const cf::PeriodicSignal &s, std::optional<double> sigma,
                   std::optional<double> snr_db) {
  if (sigma.has_value() == snr_db.has_value())
    throw cf::config_error("give exactly one of --sigma and --snr-db");
  if (sigma) {
    if (!(*sigma >= 0.0)) throw cf::config_error("--sigma must be >= 0");
    return *sigma;
  }
  return cf::snr_to_sigma(s, *snr_db);
}

template <class Fn> void with_output(const std::string &path, Fn &&fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw cf::data_error("cannot write '" + path + "'");
  fn(out);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Frequency estimation for irregularly sampled periodic signals"};
  app.require_subcommand(1);

  // simulate
  auto *sim = app.add_subcommand("simulate", "Simulate a noisy light curve");
  std::string sim_signal, sim_scheme = "exponential:5", sim_out;
  std::size_t sim_n = 300;
  std::optional<double> sim_sigma, sim_snr;
  std::uint64_t sim_seed = 0;
  sim->add_option("--signal", sim_signal, "Signal JSON file")->required();
  sim->add_option("--scheme", sim_scheme,
                  "exponential:RATE | gamma:SHAPE,RATE | uniform:A,B")
      ->capture_default_str();
  sim->add_option("--n", sim_n, "Number of observations")->capture_default_str();
  sim->add_option("--sigma", sim_sigma, "Noise standard deviation");
  sim->add_option("--snr-db", sim_snr, "Signal-to-noise ratio in dB");
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim->add_option("--output,-o", sim_out, "Output CSV (default stdout)");

  // fit
  auto *fit = app.add_subcommand("fit", "Fit a trigonometric polynomial");
  std::string fit_in, fit_out;
  double fit_period = 0.0;
  int fit_degree = 6;
  fit->add_option("--input,-i", fit_in, "Light curve CSV")->required();
  fit->add_option("--period", fit_period, "Known period")->required();
  fit->add_option("--degree", fit_degree, "Polynomial degree")->capture_default_str();
  fit->add_option("--output,-o", fit_out, "Output JSON (default stdout)");

  // estimate
  auto *est = app.add_subcommand("estimate", "Estimate the frequency");
  std::string est_in, est_method = "clsp", est_dump;
  double fmin = 0.2, fmax = 0.52, mesh = 5e-5;
  int est_K = 4;
  bool est_refine = false;
  unsigned est_threads = 1;
  est->add_option("--input,-i", est_in, "Light curve CSV")->required();
  est->add_option("--method", est_method, "clsp or ls")
      ->check(CLI::IsMember({"clsp", "ls"}))
      ->capture_default_str();
  est->add_option("--fmin", fmin)->capture_default_str();
  est->add_option("--fmax", fmax)->capture_default_str();
  est->add_option("--mesh", mesh)->capture_default_str();
  est->add_option("--K", est_K, "Harmonic count")->capture_default_str();
  est->add_flag("--refine", est_refine, "Parabolic refinement of the grid optimum");
  est->add_option("--dump-periodogram", est_dump, "Write f,lambda CSV");
  est->add_option("--threads", est_threads, "Worker threads (0 = all)")
      ->capture_default_str();

  // theory
  auto *th = app.add_subcommand("theory", "Asymptotic standard deviations");
  std::string th_signal, th_scheme = "exponential:5";
  std::optional<double> th_sigma, th_snr;
  std::vector<std::size_t> th_n{300, 600};
  int th_ell = 1;
  th->add_option("--signal", th_signal, "Signal JSON file")->required();
  th->add_option("--scheme", th_scheme)->capture_default_str();
  th->add_option("--sigma", th_sigma, "Noise standard deviation");
  th->add_option("--snr-db", th_snr, "Signal-to-noise ratio in dB");
  th->add_option("--n", th_n, "Sample sizes")->delimiter(',')->capture_default_str();
  th->add_option("--ell", th_ell, "Sub-multiple index of the target")
      ->capture_default_str();

  // mc
  auto *mc = app.add_subcommand("mc", "Run a Monte-Carlo experiment");
  std::string mc_config, mc_csv;
  std::optional<unsigned> mc_threads;
  mc->add_option("--config,-c", mc_config, "ExperimentConfig JSON")->required();
  mc->add_option("--csv", mc_csv, "Write the statistics CSV here");
  mc->add_option("--threads", mc_threads, "Override worker threads (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const auto s = load_signal(sim_signal);
      const auto scheme = cf::parse_scheme(sim_scheme);
      const double sigma = noise_sigma(s, sim_sigma, sim_snr);
      const auto data =
          cf::observe(s, cf::sample_instants(scheme, sim_n, sim_seed), sigma,
                      cf::noise_seed(sim_seed));
      with_output(sim_out, [&](std::ostream &o) { cf::write_timeseries_csv(o, data); });
    } else if (*fit) {
      if (!(fit_period > 0.0)) throw cf::config_error("--period must be > 0");
      const auto data = cf::read_timeseries_csv(fit_in);
      const auto s =
          cf::fit_trig_poly(data.times(), data.values(), 1.0 / fit_period, fit_degree);
      with_output(fit_out, [&](std::ostream &o) {
        o << std::setprecision(17) << cf::to_json(s).dump(2) << '\n';
      });
    } else if (*est) {
      const auto data = cf::read_timeseries_csv(est_in);
      const cf::FrequencyGrid grid(fmin, fmax, mesh);
      const auto method = cf::parse_method(est_method);
      const auto r = cf::estimate(data, grid, method, est_K, est_refine, est_threads);
      if (!est_dump.empty()) {
        const auto lambda = cf::clsp_grid(data, grid, est_K, est_threads);
        const auto f = grid.points();
        with_output(est_dump, [&](std::ostream &o) {
          cf::write_periodogram_csv(o, f, lambda);
        });
      }
      std::cout << cf::to_json(r).dump(2) << '\n';
    } else if (*th) {
      const auto s = load_signal(th_signal);
      const auto scheme = cf::parse_scheme(th_scheme);
      const double sigma = noise_sigma(s, th_sigma, th_snr);
      const auto report = cf::clsp_variance(s, scheme, sigma);
      json out{{"report", cf::to_json(report)}, {"ell", th_ell}};
      json per_n = json::array();
      for (auto n : th_n)
        per_n.push_back({{"n", n},
                         {"optimal_sd", cf::optimal_sd(report, n)},
                         {"predicted_clsp_sd", cf::predicted_clsp_sd(report, n, th_ell)}});
      out["sd"] = std::move(per_n);
      std::cout << out.dump(2) << '\n';
    } else if (*mc) {
      std::ifstream in(mc_config);
      if (!in) throw cf::data_error("cannot open config '" + mc_config + "'");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error &e) {
        throw cf::config_error(std::string("config: ") + e.what());
      }
      auto cfg = cf::config_from_json(
          j, std::filesystem::path(mc_config).parent_path().string());
      if (mc_threads) cfg.threads = *mc_threads;
      const auto res = cf::run_experiment(cfg);
      const auto table = cf::report_table(res);
      for (const auto &w : res.warnings) std::cerr << "warning: " << w << '\n';
      if (!mc_csv.empty())
        with_output(mc_csv, [&](std::ostream &o) { o << table.csv; });
      else
        std::cout << table.csv << '\n';
      std::cout << table.text;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return cf::exit_code_for(e);
  }
  return 0;
}

#ifndef CLSPFREQ_ESTIMATOR_HPP
#define CLSPFREQ_ESTIMATOR_HPP

// Grid search for the frequency: argmax of the CLSP or argmin of the
// least-squares criterion, with an optional single parabolic step.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "parallel.hpp"
#include "grid.hpp"
#include "periodogram.hpp"

namespace clspfreq {

enum class Method { clsp, ls };

inline std::string to_string(Method m) { return m == Method::clsp ? "clsp" : "ls"; }

inline Method parse_method(const std::string &s) {
  if (s == "clsp" || s == "CLSP" || s == "cp") return Method::clsp;
  if (s == "ls" || s == "LS") return Method::ls;
  throw config_error("unknown method '" + s + "' (expected clsp or ls)");
}

/// A grid point the LS scan had to skip.
struct SkippedPoint {
  std::size_t index;
  double f;
  std::string reason;
};

struct EstimateResult {
  double f_hat = 0.0;
  double criterion_value = 0.0;
  Method method = Method::clsp;
  int K = 1;
  bool refined = false;
  std::size_t grid_index = 0;
  std::vector<SkippedPoint> skipped;
};

inline nlohmann::json to_json(const EstimateResult &r) {
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto &s : r.skipped)
    skipped.push_back({{"index", s.index}, {"f", s.f}, {"reason", s.reason}});
  return {{"f_hat", r.f_hat},
          {"criterion_value", r.criterion_value},
          {"method", to_string(r.method)},
          {"K", r.K},
          {"refined", r.refined},
          {"grid_index", r.grid_index},
          {"skipped", std::move(skipped)}};
}

namespace detail {

/// Index of the best finite value; ties go to the lowest index.
/// `sign` is +1 for maximization, -1 for minimization.
inline std::optional<std::size_t> best_index(const std::vector<double> &v,
                                             double sign) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isnan(v[i])) continue;
    if (!best || sign * v[i] > sign * v[*best]) best = i;
  }
  return best;
}

/// Parabolic step through the winner and its neighbours. Returns the vertex
/// frequency when the parabola opens the right way and the vertex lies
/// within one mesh of the winner.
inline std::optional<double> parabolic_vertex(const FrequencyGrid &grid,
                                              const std::vector<double> &v,
                                              std::size_t i, double sign) {
  if (i == 0 || i + 1 >= v.size()) return std::nullopt;
  const double ym = sign * v[i - 1], y0 = sign * v[i], yp = sign * v[i + 1];
  if (std::isnan(ym) || std::isnan(yp)) return std::nullopt;
  const double curvature = ym - 2.0 * y0 + yp;
  if (!(curvature < 0.0)) return std::nullopt;
  const double delta = 0.5 * (ym - yp) / curvature;
  if (!(std::abs(delta) <= 1.0)) return std::nullopt;
  const double f = grid[i] + delta * grid.mesh();
  if (f < grid.f_min() || f > grid.f_max()) return std::nullopt;
  return f;
}

template <class Criterion>
EstimateResult finish(const FrequencyGrid &grid, const std::vector<double> &v,
                      std::size_t i, double sign, bool refine, Method method,
                      int K, Criterion &&criterion) {
  EstimateResult r;
  r.method = method;
  r.K = K;
  r.grid_index = i;
  r.f_hat = grid[i];
  r.criterion_value = v[i];
  if (refine) {
    if (const auto f = parabolic_vertex(grid, v, i, sign)) {
      try {
        const double c = criterion(*f);
        if (sign * c >= sign * v[i]) {
          r.f_hat = *f;
          r.criterion_value = c;
          r.refined = true;
        }
      } catch (const singular_gram_error &) {
      }
    }
  }
  return r;
}

} // namespace detail

/// Grid argmax of the CLSP.
inline EstimateResult estimate_clsp(const TimeSeries &data,
                                    const FrequencyGrid &grid, int K,
                                    bool refine = false,
                                    unsigned threads = 1) {
  if (grid.size() == 0) throw config_error("estimate_clsp: empty grid");
  const auto v = clsp_grid(data, grid, K, threads);
  const auto i = detail::best_index(v, +1.0);
  return detail::finish(grid, v, *i, +1.0, refine, Method::clsp, K,
                        [&](double f) { return clsp(data, f, K); });
}

/// Grid argmin of the LS criterion. Singular Gram points are skipped and
/// listed in the result; if every point fails the last error is rethrown.
inline EstimateResult estimate_ls(const TimeSeries &data,
                                  const FrequencyGrid &grid, int K,
                                  bool refine = false, unsigned threads = 1) {
  if (grid.size() == 0) throw config_error("estimate_ls: empty grid");
  if (K < 1) throw config_error("estimate_ls: K must be >= 1");
  if (data.size() < static_cast<std::size_t>(2 * K + 1))
    throw config_error("estimate_ls: need n >= 2K+1 samples");
  std::vector<double> v(grid.size());
  std::vector<std::optional<singular_gram_error>> errors(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    try {
      v[i] = ls_criterion(data, grid[i], K);
    } catch (const singular_gram_error &e) {
      v[i] = std::numeric_limits<double>::quiet_NaN();
      errors[i] = e;
    }
  });
  const auto i = detail::best_index(v, -1.0);
  if (!i) throw *errors.back();
  auto r = detail::finish(grid, v, *i, -1.0, refine, Method::ls, K,
                          [&](double f) { return ls_criterion(data, f, K); });
  for (std::size_t j = 0; j < errors.size(); ++j)
    if (errors[j]) r.skipped.push_back({j, grid[j], errors[j]->what()});
  return r;
}

inline EstimateResult estimate(const TimeSeries &data,
                               const FrequencyGrid &grid, Method method, int K,
                               bool refine = false, unsigned threads = 1) {
  return method == Method::clsp ? estimate_clsp(data, grid, K, refine, threads)
                                : estimate_ls(data, grid, K, refine, threads);
}

} // namespace clspfreq

#endif

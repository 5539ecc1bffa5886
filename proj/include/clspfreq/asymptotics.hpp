#ifndef CLSPFREQ_ASYMPTOTICS_HPP
#define CLSPFREQ_ASYMPTOTICS_HPP

// Large-sample behaviour of the frequency estimators.
//
// With mu = E[V] and noise SD sigma, the efficient variance bound is 1/I*,
//
//   I* = mu^2 / (12 sigma^2 f*) * integral over one period of sdot^2,
//
// and the CLSP estimator satisfies n^{3/2} (f_hat - f_0) f* / f_0 -> N(0, v),
//
//   v = (1/I*) { 1 + sum_{k != 0} |c_k(s sdot)|^2 w(2 pi k f*)
//                    / (sigma^2 sum_k |c_k(sdot)|^2) },
//   w(t) = (1 - |Phi(t)|^2) / |1 - Phi(t)|^2.
//
// For exponential inter-arrivals w == 1 and the bracket reduces to
// 1 + ||s sdot||^2 / (sigma^2 ||sdot||^2).

#include <cmath>
#include <cstddef>

#include <json.hpp>

#include "errors.hpp"
#include "sampling.hpp"
#include "signal.hpp"

namespace clspfreq {

struct AsymptoticReport {
  double f_star = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double i_star = 0.0;
  double sigma_check_sq = 0.0;
  /// sum_{k != 0} |c_k(s sdot)|^2 w(2 pi k f*)
  double gamma_series = 0.0;
  /// sigma^2 sum_k |c_k(sdot)|^2
  double derivative_energy = 0.0;
  int truncation_k = 0;
  double truncation_residual = 0.0;
};

/// Weight (1 - |Phi(t)|^2) / |1 - Phi(t)|^2 of the extra CLSP variance term.
inline double renewal_weight(const RenewalScheme &scheme, double t) {
  return scheme.one_minus_abs_sq(t) / std::norm(scheme.one_minus_char_fn(t));
}

inline double information(const PeriodicSignal &s, double mu, double sigma) {
  if (s.is_constant())
    throw zero_information_error("information: constant signal");
  if (!(sigma > 0.0)) throw config_error("information: sigma must be > 0");
  if (!(mu > 0.0)) throw config_error("information: mu must be > 0");
  return mu * mu / (12.0 * sigma * sigma * s.f_star()) *
         l2_norm_sq(derivative(s));
}

inline AsymptoticReport clsp_variance(const PeriodicSignal &s,
                                      const RenewalScheme &scheme, double sigma,
                                      double tol = 0.0) {
  (void)tol; // finite degree: the k-sum is exact
  AsymptoticReport r;
  r.f_star = s.f_star();
  r.mu = scheme.mean();
  r.sigma = sigma;
  r.i_star = information(s, r.mu, sigma);

  const PeriodicSignal sdot = derivative(s);
  const PeriodicSignal prod = product_coeffs(s, sdot);
  // c_0(s sdot) = 0 because s sdot = (s^2)'/2.
  double scale = 0.0;
  for (int k = -s.degree(); k <= s.degree(); ++k)
    scale += std::abs(s.coeff(k)) * std::abs(sdot.coeff(k));
  if (std::abs(prod.coeff(0)) > 1e-12 * scale + 1e-300)
    throw numerical_error("clsp_variance: c_0(s sdot) is not zero");

  double gamma = 0.0;
  for (int k = 1; k <= prod.degree(); ++k) {
    const double a = std::norm(prod.coeff(k));
    if (a == 0.0) continue;
    const double t = two_pi * k * s.f_star();
    gamma += a * (renewal_weight(scheme, t) + renewal_weight(scheme, -t));
  }
  r.gamma_series = gamma;
  r.derivative_energy = sigma * sigma * sdot.coeff_energy();
  r.sigma_check_sq = (1.0 + gamma / r.derivative_energy) / r.i_star;
  r.truncation_k = prod.degree();
  r.truncation_residual = 0.0;
  return r;
}

/// n^{-3/2} I*^{-1/2}
inline double optimal_sd(const AsymptoticReport &r, std::size_t n) {
  if (n < 1) throw config_error("optimal_sd: n must be >= 1");
  return std::pow(static_cast<double>(n), -1.5) / std::sqrt(r.i_star);
}

/// n^{-3/2} sigma_check / ell, the CLSP SD when the target is f* / ell.
inline double predicted_clsp_sd(const AsymptoticReport &r, std::size_t n,
                                int ell = 1) {
  if (n < 1) throw config_error("predicted_clsp_sd: n must be >= 1");
  if (ell < 1) throw config_error("predicted_clsp_sd: ell must be >= 1");
  return std::pow(static_cast<double>(n), -1.5) * std::sqrt(r.sigma_check_sq) /
         ell;
}

inline nlohmann::json to_json(const AsymptoticReport &r) {
  return {{"f_star", r.f_star},
          {"mu", r.mu},
          {"sigma", r.sigma},
          {"i_star", r.i_star},
          {"sigma_check_sq", r.sigma_check_sq},
          {"gamma_series", r.gamma_series},
          {"derivative_energy", r.derivative_energy},
          {"efficiency_ratio", r.sigma_check_sq * r.i_star},
          {"truncation_k", r.truncation_k},
          {"truncation_residual", r.truncation_residual}};
}

} // namespace clspfreq

#endif

#ifndef CLSPFREQ_SIGNAL_HPP
#define CLSPFREQ_SIGNAL_HPP

// Real periodic signals stored through their Fourier coefficients
//
//   s(t) = sum_{|k| <= d} c_k exp(2 i pi k f t),   c_{-k} = conj(c_k).
//
// Only the k >= 0 half is stored; negative indices are served by
// conjugation so the Hermitian symmetry cannot drift.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errors.hpp"

namespace clspfreq {

using complex = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Phase of cycle count x reduced to [0, 1) before scaling by 2 pi, which
/// keeps trig arguments small for large times.
inline complex unit_phasor(double cycles) {
  const double frac = cycles - std::floor(cycles);
  return std::polar(1.0, two_pi * frac);
}

class PeriodicSignal {
public:
  /// Zero signal of degree 0.
  explicit PeriodicSignal(double f_star = 1.0)
      : PeriodicSignal(f_star, std::vector<complex>{complex{}}) {}

  /// `coeffs[k]` is c_k for k = 0..d. c_0 must be real.
  PeriodicSignal(double f_star, std::vector<complex> coeffs)
      : f_star_(f_star), coeffs_(std::move(coeffs)) {
    if (!(f_star_ > 0.0) || !std::isfinite(f_star_))
      throw config_error("PeriodicSignal: f_star must be positive and finite");
    if (coeffs_.empty()) coeffs_.emplace_back();
    double scale = 0.0;
    for (const auto &c : coeffs_) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw config_error("PeriodicSignal: non-finite coefficient");
      scale += std::abs(c);
    }
    if (std::abs(coeffs_[0].imag()) > 1e-12 * scale)
      throw config_error("PeriodicSignal: c_0 must be real");
    coeffs_[0] = complex{coeffs_[0].real(), 0.0};
  }

  double f_star() const noexcept { return f_star_; }
  double period() const noexcept { return 1.0 / f_star_; }
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }

  /// c_k for any integer k; zero outside [-d, d].
  complex coeff(int k) const noexcept {
    const int a = k < 0 ? -k : k;
    if (a > degree()) return {};
    return k < 0 ? std::conj(coeffs_[a]) : coeffs_[a];
  }

  /// Authoritative half c_0..c_d.
  std::span<const complex> nonnegative_coeffs() const noexcept {
    return coeffs_;
  }

  /// Sum of |c_k|^2 over all k in [-d, d].
  double coeff_energy() const noexcept {
    double e = std::norm(coeffs_[0]);
    for (int k = 1; k <= degree(); ++k) e += 2.0 * std::norm(coeffs_[k]);
    return e;
  }

  bool is_constant() const noexcept {
    for (int k = 1; k <= degree(); ++k)
      if (coeffs_[k] != complex{}) return false;
    return true;
  }

  /// Same coefficients with the constant term removed.
  PeriodicSignal without_mean() const {
    auto c = coeffs_;
    c[0] = {};
    return {f_star_, std::move(c)};
  }

  PeriodicSignal scaled(double alpha) const {
    auto c = coeffs_;
    for (auto &x : c) x *= alpha;
    return {f_star_, std::move(c)};
  }

private:
  double f_star_;
  std::vector<complex> coeffs_;
};

/// Evaluates s(t). Throws numerical_error if the imaginary residue of the
/// two-sided sum exceeds 1e-10 of the coefficient mass.
inline double eval(const PeriodicSignal &s, double t) {
  complex sum = s.coeff(0);
  double mass = std::abs(s.coeff(0));
  for (int k = 1; k <= s.degree(); ++k) {
    const complex w = unit_phasor(k * s.f_star() * t);
    sum += s.coeff(k) * w + s.coeff(-k) * std::conj(w);
    mass += 2.0 * std::abs(s.coeff(k));
  }
  if (std::abs(sum.imag()) > 1e-10 * mass + 1e-300)
    throw numerical_error("eval: Hermitian symmetry violated");
  return sum.real();
}

/// Time derivative: c_k -> 2 i pi k f c_k.
inline PeriodicSignal derivative(const PeriodicSignal &s) {
  std::vector<complex> c(s.degree() + 1);
  for (int k = 1; k <= s.degree(); ++k)
    c[k] = complex{0.0, two_pi * k * s.f_star()} * s.coeff(k);
  return {s.f_star(), std::move(c)};
}

/// Coefficients of the pointwise product a(t) b(t) (discrete convolution).
inline PeriodicSignal product_coeffs(const PeriodicSignal &a,
                                     const PeriodicSignal &b) {
  if (std::abs(a.f_star() - b.f_star()) >
      1e-12 * std::max(a.f_star(), b.f_star()))
    throw config_error("product_coeffs: fundamental frequencies differ");
  const int da = a.degree(), db = b.degree();
  std::vector<complex> c(da + db + 1);
  // c_0 is real: pair the j and -j terms explicitly.
  double c0 = (a.coeff(0) * b.coeff(0)).real();
  for (int j = 1; j <= std::min(da, db); ++j)
    c0 += 2.0 * (a.coeff(j) * b.coeff(-j)).real();
  c[0] = c0;
  for (int k = 1; k <= da + db; ++k) {
    complex acc{};
    for (int j = std::max(-da, k - db); j <= std::min(da, k + db); ++j)
      acc += a.coeff(j) * b.coeff(k - j);
    c[k] = acc;
  }
  return {a.f_star(), std::move(c)};
}

/// Integral of s^2 over one period, via Parseval.
inline double l2_norm_sq(const PeriodicSignal &s) {
  return s.coeff_energy() / s.f_star();
}

/// Condition-number limit of the trigonometric design matrix.
inline constexpr double kFitConditionLimit = 1e10;

/// Least-squares trigonometric polynomial of the given degree at frequency f.
/// The real design [1, cos(2 pi k f t), sin(2 pi k f t)] is solved with a
/// column-pivoted Householder QR.
inline PeriodicSignal fit_trig_poly(std::span<const double> times,
                                    std::span<const double> values, double f,
                                    int degree) {
  if (times.size() != values.size())
    throw config_error("fit_trig_poly: times and values differ in length");
  if (degree < 0) throw config_error("fit_trig_poly: negative degree");
  if (!(f > 0.0)) throw config_error("fit_trig_poly: frequency must be > 0");
  const auto n = static_cast<Eigen::Index>(times.size());
  const Eigen::Index p = 2 * degree + 1;
  if (n < p)
    throw config_error("fit_trig_poly: need at least 2*degree+1 samples");

  Eigen::MatrixXd A(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    A(j, 0) = 1.0;
    const complex z = unit_phasor(f * times[j]);
    complex w{1.0, 0.0};
    for (int k = 1; k <= degree; ++k) {
      w *= z;
      A(j, 2 * k - 1) = w.real();
      A(j, 2 * k) = w.imag();
    }
    y(j) = values[j];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  const auto &sv = svd.singularValues();
  const double cond = sv(p - 1) > 0.0 ? sv(0) / sv(p - 1)
                                      : std::numeric_limits<double>::infinity();
  if (!(cond <= kFitConditionLimit)) {
    Eigen::Index worst = 0;
    svd.matrixV().col(p - 1).cwiseAbs().maxCoeff(&worst);
    const int harmonic = static_cast<int>((worst + 1) / 2);
    std::ostringstream msg;
    msg << "fit_trig_poly: degenerate design at f=" << f << " (condition "
        << cond << "); harmonic " << harmonic << " (spacing " << harmonic * f
        << ") is not resolved by the sampling times";
    throw degenerate_design_error(msg.str(), f, harmonic, cond);
  }

  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(y);
  std::vector<complex> c(degree + 1);
  c[0] = beta(0);
  for (int k = 1; k <= degree; ++k)
    c[k] = 0.5 * complex{beta(2 * k - 1), -beta(2 * k)};
  return {f, std::move(c)};
}

// JSON: {"f_star": f, "coeffs": [{"k": k, "re": x, "im": y}, ...]}, k >= 0.

inline nlohmann::json to_json(const PeriodicSignal &s) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (int k = 0; k <= s.degree(); ++k)
    coeffs.push_back(
        {{"k", k}, {"re", s.coeff(k).real()}, {"im", s.coeff(k).imag()}});
  return {{"f_star", s.f_star()}, {"coeffs", std::move(coeffs)}};
}

inline PeriodicSignal signal_from_json(const nlohmann::json &j) {
  try {
    const double f = j.at("f_star").get<double>();
    std::vector<complex> c;
    std::vector<bool> seen;
    for (const auto &e : j.at("coeffs")) {
      const int k = e.at("k").get<int>();
      if (k < 0)
        throw data_error("signal JSON: negative k is never serialized");
      if (static_cast<std::size_t>(k) >= c.size()) {
        c.resize(k + 1);
        seen.resize(k + 1, false);
      }
      if (seen[k]) throw data_error("signal JSON: duplicate k");
      seen[k] = true;
      c[k] = {e.at("re").get<double>(), e.value("im", 0.0)};
    }
    return {f, std::move(c)};
  } catch (const nlohmann::json::exception &e) {
    throw data_error(std::string("signal JSON: ") + e.what());
  }
}

} // namespace clspfreq

#endif

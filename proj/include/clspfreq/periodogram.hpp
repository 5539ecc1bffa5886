#ifndef CLSPFREQ_PERIODOGRAM_HPP
#define CLSPFREQ_PERIODOGRAM_HPP

// Cumulated Lomb-Scargle periodogram
//
//   Lambda_n(f) = n^-2 sum_{k=1..K} | sum_j Y_j exp(-2 i pi k f X_j) |^2
//
// and the harmonic least-squares machinery: Gram matrix
// G_{k,l} = sum_j exp(-2 i pi (k-l) f X_j), empirical coefficients
// c_hat_l = n^-1 sum_j Y_j exp(-2 i pi l f X_j), and the residual sum of
// squares sum_j Y_j^2 - n^2 c_hat^* G^-1 c_hat.
//
// Inner sums compute one phasor per sample and reach harmonic k by
// repeated multiplication.

#include <cmath>
#include <complex>
#include <ostream>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "sampling.hpp"
#include "signal.hpp"

namespace clspfreq {

/// phi_{n,X}(t) = n^-1 sum_j exp(i t X_j).
inline complex empirical_char_fn(std::span<const double> times, double t) {
  if (times.empty()) throw config_error("empirical_char_fn: no samples");
  complex acc{};
  for (double x : times) acc += unit_phasor(t * x / two_pi);
  return acc / static_cast<double>(times.size());
}

namespace detail {

/// out[m] = sum_j w_j exp(-2 i pi m f X_j) for m = 1..M (out[0] unused).
inline void harmonic_sums(std::span<const double> times,
                          std::span<const double> weights, double f, int M,
                          std::vector<complex> &out) {
  out.assign(M + 1, complex{});
  for (std::size_t j = 0; j < times.size(); ++j) {
    const complex z = std::conj(unit_phasor(f * times[j]));
    const double w = weights.empty() ? 1.0 : weights[j];
    complex p = z;
    out[1] += w * p;
    for (int m = 2; m <= M; ++m) {
      p *= z;
      out[m] += w * p;
    }
  }
}

inline void check_harmonics(double f, int K) {
  if (!(f > 0.0) || !std::isfinite(f))
    throw config_error("frequency must be positive and finite");
  if (K < 1) throw config_error("harmonic count K must be >= 1");
}

} // namespace detail

/// Lambda_n(f) with K harmonics. The sample order is irrelevant.
inline double clsp(std::span<const double> times,
                   std::span<const double> values, double f, int K) {
  detail::check_harmonics(f, K);
  if (times.size() != values.size())
    throw config_error("clsp: times and values differ in length");
  if (times.empty()) throw config_error("clsp: no samples");
  std::vector<complex> sums;
  detail::harmonic_sums(times, values, f, K, sums);
  double acc = 0.0;
  for (int k = 1; k <= K; ++k) acc += std::norm(sums[k]);
  const double n = static_cast<double>(times.size());
  return acc / (n * n);
}

inline double clsp(const TimeSeries &data, double f, int K) {
  return clsp(data.times(), data.values(), f, K);
}

/// Gram matrix and empirical coefficients at one candidate frequency.
/// Indices are shifted by K: row/entry i corresponds to harmonic i - K.
struct GramSystem {
  Eigen::MatrixXcd G;
  Eigen::VectorXcd c_hat;
  std::size_t n = 0;
  int K = 0;
  double f = 0.0;
};

inline GramSystem gram_system(std::span<const double> times,
                              std::span<const double> values, double f,
                              int K) {
  detail::check_harmonics(f, K);
  if (times.size() != values.size())
    throw config_error("gram_system: times and values differ in length");
  if (times.empty()) throw config_error("gram_system: no samples");
  const double n = static_cast<double>(times.size());

  // The Toeplitz structure needs only the 2K+1 sums for k - l = 0..2K.
  std::vector<complex> lag, proj;
  detail::harmonic_sums(times, {}, f, 2 * K, lag);
  lag[0] = n;
  detail::harmonic_sums(times, values, f, K, proj);
  double ysum = 0.0;
  for (double y : values) ysum += y;
  proj[0] = ysum;

  GramSystem g;
  g.n = times.size();
  g.K = K;
  g.f = f;
  const int p = 2 * K + 1;
  g.G.resize(p, p);
  g.c_hat.resize(p);
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < p; ++c) {
      const int d = r - c;
      g.G(r, c) = d >= 0 ? lag[d] : std::conj(lag[-d]);
    }
    const int l = r - K;
    g.c_hat(r) = (l >= 0 ? proj[l] : std::conj(proj[-l])) / n;
  }
  return g;
}

/// Reciprocal-condition limit for the Gram solve (condition above 1e12).
inline constexpr double kGramConditionLimit = 1e12;

/// L_n(f, c~(f)) = sum_j Y_j^2 - n^2 c_hat^* G^-1 c_hat.
/// Throws singular_gram_error when the condition estimate exceeds 1e12.
inline double ls_criterion(const TimeSeries &data, double f, int K) {
  detail::check_harmonics(f, K);
  if (data.size() < static_cast<std::size_t>(2 * K + 1))
    throw config_error("ls_criterion: need n >= 2K+1 samples");
  const GramSystem g = gram_system(data.times(), data.values(), f, K);

  double energy = 0.0;
  for (double y : data.values()) energy += y * y;

  const Eigen::LDLT<Eigen::MatrixXcd> ldlt(g.G);
  // LDLT solves through zero pivots, so rcond() alone misses exact rank
  // loss; the pivot spread max|D|/min|D| bounds the condition from below.
  double rcond = 0.0;
  if (ldlt.info() == Eigen::Success) {
    const auto d = ldlt.vectorD().real().cwiseAbs();
    const double spread = d.minCoeff() / d.maxCoeff();
    rcond = std::min(ldlt.rcond(), spread);
  }
  if (!(rcond * kGramConditionLimit >= 1.0)) {
    std::ostringstream msg;
    msg << "ls_criterion: singular Gram matrix at f=" << f << ", K=" << K
        << " (reciprocal condition " << rcond << ")";
    throw singular_gram_error(msg.str(), f, K,
                              rcond > 0.0 ? 1.0 / rcond
                                          : std::numeric_limits<double>::infinity());
  }
  const Eigen::VectorXcd x = ldlt.solve(g.c_hat);
  const double n = static_cast<double>(g.n);
  const complex q = n * n * g.c_hat.dot(x);
  if (std::abs(q.imag()) > 1e-8 * std::abs(q) + 1e-300)
    throw numerical_error("ls_criterion: quadratic form is not real");
  return energy - std::max(q.real(), 0.0);
}

/// Lambda_n at every grid point; threads = 0 uses all hardware threads.
/// Each entry is computed independently of the partition.
inline std::vector<double> clsp_grid(const TimeSeries &data,
                                     const FrequencyGrid &grid, int K,
                                     unsigned threads = 1) {
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), threads,
               [&](std::size_t i) { out[i] = clsp(data, grid[i], K); });
  return out;
}

/// "f,lambda" rows at 17 significant digits.
inline void write_periodogram_csv(std::ostream &out,
                                  std::span<const double> freqs,
                                  std::span<const double> values) {
  const auto old = out.precision(17);
  out << "f,lambda\n";
  for (std::size_t i = 0; i < freqs.size(); ++i)
    out << freqs[i] << ',' << values[i] << '\n';
  out.precision(old);
}

} // namespace clspfreq

#endif

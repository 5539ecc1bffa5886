#ifndef CLSPFREQ_SAMPLING_HPP
#define CLSPFREQ_SAMPLING_HPP

// Renewal sampling schemes, noisy observations and the light-curve CSV
// format.

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "random.hpp"
#include "signal.hpp"

namespace clspfreq {

struct Exponential {
  double rate;
};
struct Gamma {
  double shape;
  double rate;
};
struct UniformInterval {
  double a;
  double b;
};

/// Law of the i.i.d. inter-arrival times V_k. All supported laws have a
/// density, so the Cramer condition sup_{|t|>=eps} |Phi(t)| < 1 holds.
class RenewalScheme {
public:
  using Law = std::variant<Exponential, Gamma, UniformInterval>;

  explicit RenewalScheme(Law law) : law_(law) {
    std::visit(
        [](const auto &l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Exponential>) {
            if (!(l.rate > 0.0) || !std::isfinite(l.rate))
              throw config_error("Exponential: rate must be > 0");
          } else if constexpr (std::is_same_v<L, Gamma>) {
            if (!(l.shape > 0.0) || !(l.rate > 0.0) ||
                !std::isfinite(l.shape) || !std::isfinite(l.rate))
              throw config_error("Gamma: shape and rate must be > 0");
          } else {
            if (!(l.a >= 0.0) || !(l.b > l.a) || !std::isfinite(l.b))
              throw config_error("UniformInterval: need 0 <= a < b");
          }
        },
        law_);
  }

  static RenewalScheme exponential(double rate) {
    return RenewalScheme(Exponential{rate});
  }
  static RenewalScheme gamma(double shape, double rate) {
    return RenewalScheme(Gamma{shape, rate});
  }
  static RenewalScheme uniform(double a, double b) {
    return RenewalScheme(UniformInterval{a, b});
  }

  const Law &law() const noexcept { return law_; }
  bool is_exponential() const noexcept {
    return std::holds_alternative<Exponential>(law_);
  }

  /// E[V^m] for m = 0..4.
  double moment(int m) const {
    if (m < 0 || m > 4) throw config_error("moment: order must be in 0..4");
    return std::visit(
        [m](const auto &l) -> double {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Exponential>) {
            double r = 1.0;
            for (int i = 1; i <= m; ++i) r *= i / l.rate;
            return r;
          } else if constexpr (std::is_same_v<L, Gamma>) {
            double r = 1.0;
            for (int i = 0; i < m; ++i) r *= (l.shape + i) / l.rate;
            return r;
          } else {
            return (std::pow(l.b, m + 1) - std::pow(l.a, m + 1)) /
                   ((m + 1) * (l.b - l.a));
          }
        },
        law_);
  }

  /// Mean inter-arrival mu = E[V].
  double mean() const { return moment(1); }

  /// Characteristic function Phi(t) = E[exp(i t V)].
  complex char_fn(double t) const { return 1.0 - one_minus_char_fn(t); }

  /// 1 - Phi(t), without cancellation near t = 0.
  complex one_minus_char_fn(double t) const {
    return std::visit(
        [t](const auto &l) -> complex {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Exponential>) {
            return complex{0.0, -t} / complex{l.rate, -t};
          } else if constexpr (std::is_same_v<L, Gamma>) {
            // Phi = exp(z), z = -shape * log(1 - i t / rate).
            const double u = t / l.rate;
            const double x = -0.5 * l.shape * std::log1p(u * u);
            const double y = l.shape * std::atan(u);
            const double s = std::sin(0.5 * y);
            const double re = std::expm1(x) * std::cos(y) - 2.0 * s * s;
            const double im = std::exp(x) * std::sin(y);
            return -complex{re, im};
          } else {
            if (std::abs(t) * l.b < 0.5) {
              // -sum_{m>=1} (i t)^m E[V^m] / m!
              complex term{1.0, 0.0}, acc{};
              const double w = l.b - l.a;
              double bp = l.b, ap = l.a;
              for (int m = 1; m < 40; ++m) {
                term *= complex{0.0, t} / static_cast<double>(m);
                bp *= l.b;
                ap *= l.a;
                const complex add = term * ((bp - ap) / ((m + 1) * w));
                acc += add;
                if (std::abs(add) <= 1e-18 * std::abs(acc)) break;
              }
              return -acc;
            }
            const double th = t * (l.b - l.a);
            const complex e = unit_phasor(t * l.a / two_pi);
            const complex ratio{std::sin(th) / th,
                                (1.0 - std::cos(th)) / th};
            return 1.0 - e * ratio;
          }
        },
        law_);
  }

  /// 1 - |Phi(t)|^2, without cancellation near t = 0.
  double one_minus_abs_sq(double t) const {
    return std::visit(
        [t](const auto &l) -> double {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Exponential>) {
            return t * t / (l.rate * l.rate + t * t);
          } else if constexpr (std::is_same_v<L, Gamma>) {
            const double u = t / l.rate;
            return -std::expm1(-l.shape * std::log1p(u * u));
          } else {
            // |Phi|^2 = sinc^2(x), x = t (b - a) / 2.
            const double x = 0.5 * t * (l.b - l.a);
            if (std::abs(x) < 0.5) {
              // sum_{m>=2} (-1)^m 2^(2m-1) x^(2m-2) / (2m)!
              double acc = 0.0, term = 8.0 * x * x / 24.0;
              for (int m = 2; m < 30; ++m) {
                acc += term;
                term *= -4.0 * x * x / ((2.0 * m + 1.0) * (2.0 * m + 2.0));
                if (std::abs(term) <= 1e-18 * std::abs(acc)) break;
              }
              return acc;
            }
            const double s = std::sin(x) / x;
            return 1.0 - s * s;
          }
        },
        law_);
  }

  /// One inter-arrival draw.
  double draw(deviate_stream &rng) const {
    return std::visit(
        [&rng](const auto &l) -> double {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Exponential>) {
            return rng.exponential(l.rate);
          } else if constexpr (std::is_same_v<L, Gamma>) {
            return rng.gamma(l.shape, l.rate);
          } else {
            return l.a + (l.b - l.a) * rng.uniform();
          }
        },
        law_);
  }

  std::string describe() const {
    std::ostringstream os;
    os << std::setprecision(17);
    std::visit(
        [&os](const auto &l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Exponential>)
            os << "exponential:" << l.rate;
          else if constexpr (std::is_same_v<L, Gamma>)
            os << "gamma:" << l.shape << ',' << l.rate;
          else
            os << "uniform:" << l.a << ',' << l.b;
        },
        law_);
    return os.str();
  }

private:
  Law law_;
};

/// Free-function form of RenewalScheme::char_fn.
inline complex char_fn(const RenewalScheme &scheme, double t) {
  return scheme.char_fn(t);
}

/// Parses "exponential:RATE", "gamma:SHAPE,RATE" or "uniform:A,B".
inline RenewalScheme parse_scheme(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw config_error("scheme: expected LAW:PARAMS, got '" +
                       std::string(spec) + "'");
  const auto law = spec.substr(0, colon);
  std::vector<double> p;
  std::string_view rest = spec.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto tok = rest.substr(0, comma);
    double v{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw config_error("scheme: bad number '" + std::string(tok) + "'");
    p.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (law == "exponential" && p.size() == 1)
    return RenewalScheme::exponential(p[0]);
  if (law == "gamma" && p.size() == 2) return RenewalScheme::gamma(p[0], p[1]);
  if (law == "uniform" && p.size() == 2)
    return RenewalScheme::uniform(p[0], p[1]);
  throw config_error("scheme: unknown law or wrong parameter count in '" +
                     std::string(spec) + "'");
}

/// JSON form: {"law": "exponential", "rate": 5} and the like.
inline RenewalScheme scheme_from_json(const nlohmann::json &j) {
  try {
    const auto law = j.at("law").get<std::string>();
    if (law == "exponential")
      return RenewalScheme::exponential(j.at("rate").get<double>());
    if (law == "gamma")
      return RenewalScheme::gamma(j.at("shape").get<double>(),
                                  j.at("rate").get<double>());
    if (law == "uniform")
      return RenewalScheme::uniform(j.at("a").get<double>(),
                                    j.at("b").get<double>());
    throw config_error("scheme JSON: unknown law '" + law + "'");
  } catch (const nlohmann::json::exception &e) {
    throw config_error(std::string("scheme JSON: ") + e.what());
  }
}

inline nlohmann::json to_json(const RenewalScheme &scheme) {
  return std::visit(
      [](const auto &l) -> nlohmann::json {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, Exponential>)
          return {{"law", "exponential"}, {"rate", l.rate}};
        else if constexpr (std::is_same_v<L, Gamma>)
          return {{"law", "gamma"}, {"shape", l.shape}, {"rate", l.rate}};
        else
          return {{"law", "uniform"}, {"a", l.a}, {"b", l.b}};
      },
      scheme.law());
}

/// Observation instants and values; times strictly increasing and positive.
class TimeSeries {
public:
  TimeSeries(std::vector<double> times, std::vector<double> values)
      : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size())
      throw data_error("TimeSeries: times and values differ in length");
    if (times_.empty()) throw data_error("TimeSeries: empty");
    for (std::size_t j = 0; j < times_.size(); ++j) {
      if (!std::isfinite(times_[j]) || !std::isfinite(values_[j]))
        throw data_error("TimeSeries: non-finite entry at row " +
                         std::to_string(j));
      if (!(times_[j] > 0.0))
        throw data_error("TimeSeries: non-positive time at row " +
                         std::to_string(j));
      if (j > 0 && !(times_[j] > times_[j - 1]))
        throw data_error("TimeSeries: times not strictly increasing at row " +
                         std::to_string(j));
    }
  }

  std::size_t size() const noexcept { return times_.size(); }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> values() const noexcept { return values_; }

  TimeSeries with_values(std::vector<double> values) const {
    return {times_, std::move(values)};
  }

  /// FNV-1a over the raw bytes of times then values.
  std::uint64_t checksum() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::vector<double> &v) {
      for (double x : v) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &x, sizeof(double));
        for (unsigned char b : bytes) {
          h ^= b;
          h *= 0x100000001b3ULL;
        }
      }
    };
    mix(times_);
    mix(values_);
    return h;
  }

  friend bool operator==(const TimeSeries &, const TimeSeries &) = default;

private:
  std::vector<double> times_;
  std::vector<double> values_;
};

/// X_1 < ... < X_n as cumulative sums of i.i.d. inter-arrivals.
inline std::vector<double> sample_instants(const RenewalScheme &scheme,
                                           std::size_t n, std::uint64_t seed) {
  if (n == 0) throw config_error("sample_instants: n must be >= 1");
  deviate_stream rng(seed);
  std::vector<double> x(n);
  double t = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double v;
    // Zero-length draws have probability zero but would break strict order.
    do {
      v = scheme.draw(rng);
    } while (!(t + v > t));
    t += v;
    x[j] = t;
  }
  return x;
}

/// Y_j = s(X_j) + eps_j with eps_j ~ N(0, sigma^2) i.i.d.
inline TimeSeries observe(const PeriodicSignal &s, std::vector<double> times,
                          double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw config_error("observe: sigma must be >= 0");
  deviate_stream rng(seed);
  std::vector<double> y(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    y[j] = eval(s, times[j]);
    if (sigma > 0.0) y[j] += sigma * rng.normal();
  }
  return {std::move(times), std::move(y)};
}

/// Average power of s around its mean: f * integral of (s - c_0)^2.
inline double ac_power(const PeriodicSignal &s) {
  return s.f_star() * l2_norm_sq(s.without_mean());
}

/// sigma with sigma^2 = P_ac * 10^(-snr_db / 10).
inline double snr_to_sigma(const PeriodicSignal &s, double snr_db) {
  if (s.is_constant())
    throw undefined_snr_error("snr_to_sigma: constant signal has no SNR");
  if (!std::isfinite(snr_db)) throw config_error("snr_to_sigma: bad SNR");
  return std::sqrt(ac_power(s) * std::pow(10.0, -snr_db / 10.0));
}

// CSV: optional "t,y" header, then "float,float" rows.

inline TimeSeries read_timeseries_csv(std::istream &in) {
  std::vector<double> t, y;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
      s.remove_suffix(1);
    return s;
  };
  auto parse = [&](std::string_view tok, double &out) {
    tok = trim(tok);
    const auto [ptr, ec] =
        std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw data_error("CSV line " + std::to_string(lineno) +
                       ": cannot parse '" + std::string(tok) + "'");
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    if (lineno == 1 && t.empty() && sv == "t,y") continue;
    const auto comma = sv.find(',');
    if (comma == std::string_view::npos || sv.find(',', comma + 1) != std::string_view::npos)
      throw data_error("CSV line " + std::to_string(lineno) +
                       ": expected two comma-separated fields");
    double a, b;
    parse(sv.substr(0, comma), a);
    parse(sv.substr(comma + 1), b);
    t.push_back(a);
    y.push_back(b);
  }
  return {std::move(t), std::move(y)};
}

inline TimeSeries read_timeseries_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  return read_timeseries_csv(in);
}

inline void write_timeseries_csv(std::ostream &out, const TimeSeries &ts,
                                 bool header = true) {
  const auto old = out.precision(17);
  if (header) out << "t,y\n";
  for (std::size_t j = 0; j < ts.size(); ++j)
    out << ts.times()[j] << ',' << ts.values()[j] << '\n';
  out.precision(old);
}

} // namespace clspfreq

#endif

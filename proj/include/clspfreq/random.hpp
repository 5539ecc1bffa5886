#ifndef CLSPFREQ_RANDOM_HPP
#define CLSPFREQ_RANDOM_HPP

// Portable random deviates.
//
// std::mt19937_64 has a fully specified output sequence, but the standard
// distributions do not, so the deviates below are implemented explicitly.
// Changing any of them changes every simulated data set: bump
// kDeviateAlgorithmVersion when that happens.

#include <cmath>
#include <cstdint>
#include <random>

namespace clspfreq {

inline constexpr int kDeviateAlgorithmVersion = 1;
inline constexpr const char *kNormalAlgorithm = "marsaglia-polar/v1";

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seeded stream of uniform, normal, exponential and gamma deviates.
class deviate_stream {
public:
  explicit deviate_stream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by the Marsaglia polar method; pairs are cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  /// Exponential with the given rate, by inversion.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Gamma(shape, rate) by Marsaglia & Tsang (2000); shape < 1 via the
  /// U^(1/shape) boost.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, 1.0);
      return g * std::pow(uniform(), 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v / rate;
    }
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace clspfreq

#endif

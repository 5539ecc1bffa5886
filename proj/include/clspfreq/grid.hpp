#ifndef CLSPFREQ_GRID_HPP
#define CLSPFREQ_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace clspfreq {

/// Points f_min + i * mesh, i = 0..floor((f_max - f_min) / mesh).
class FrequencyGrid {
public:
  FrequencyGrid(double f_min, double f_max, double mesh)
      : f_min_(f_min), f_max_(f_max), mesh_(mesh) {
    if (!(f_min > 0.0) || !std::isfinite(f_max) || !(f_max >= f_min))
      throw config_error("FrequencyGrid: need 0 < f_min <= f_max");
    if (!(mesh > 0.0) || !std::isfinite(mesh))
      throw config_error("FrequencyGrid: mesh must be > 0");
    // Tolerate the representation error of (f_max - f_min) / mesh so that
    // e.g. [0.2, 0.52] with mesh 5e-5 ends exactly at 0.52.
    const double q = (f_max - f_min) / mesh;
    count_ = static_cast<std::size_t>(std::floor(q * (1.0 + 1e-12) + 1e-9)) + 1;
    if (count_ > (std::size_t{1} << 31))
      throw config_error("FrequencyGrid: too many points");
  }

  double f_min() const noexcept { return f_min_; }
  double f_max() const noexcept { return f_max_; }
  double mesh() const noexcept { return mesh_; }
  std::size_t size() const noexcept { return count_; }

  double operator[](std::size_t i) const noexcept {
    return std::min(f_min_ + static_cast<double>(i) * mesh_, f_max_);
  }

  std::vector<double> points() const {
    std::vector<double> p(count_);
    for (std::size_t i = 0; i < count_; ++i) p[i] = (*this)[i];
    return p;
  }

private:
  double f_min_, f_max_, mesh_;
  std::size_t count_;
};

} // namespace clspfreq

#endif

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "nlsn/radial_grid.hpp"

namespace nlsn::testing {

inline double max_abs_diff(const Field& f, const Field& g) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::fabs(f[i] - g[i]));
  return m;
}

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::fabs(x));
  return m;
}

/// Positive sum of a few Gaussians exp(-(r/s)^2) with widths in
/// [width_lo, width_hi]. Smooth, radially even and decaying.
class GaussianMixture {
 public:
  GaussianMixture(std::mt19937_64& rng, double width_lo, double width_hi, int terms = 3) {
    std::uniform_real_distribution<double> amp(0.2, 2.0);
    std::uniform_real_distribution<double> width(width_lo, width_hi);
    for (int k = 0; k < terms; ++k) terms_.push_back({amp(rng), width(rng)});
  }

  double operator()(double r) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.amp * std::exp(-(r / t.width) * (r / t.width));
    return s;
  }

  Field sample(const GridPtr& grid) const {
    return Field::sample(grid, [this](double r) { return (*this)(r); });
  }

 private:
  struct Term {
    double amp;
    double width;
  };
  std::vector<Term> terms_;
};

}  // namespace nlsn::testing

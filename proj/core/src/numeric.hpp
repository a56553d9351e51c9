#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace nlsn::detail {

/// |x|^p with a multiply-only path for small integer exponents, which cover
/// most fixtures (p = 3, 4, 5, 6).
class AbsPower {
 public:
  explicit AbsPower(double p) : p_(p) {
    const double r = std::round(p);
    integer_ = (r == p && r >= 0.0 && r <= 8.0) ? static_cast<int>(r) : -1;
  }

  double operator()(double x) const {
    const double a = std::fabs(x);
    switch (integer_) {
      case 0: return 1.0;
      case 1: return a;
      case 2: return a * a;
      case 3: return a * a * a;
      case 4: { const double s = a * a; return s * s; }
      case 5: { const double s = a * a; return s * s * a; }
      case 6: { const double s = a * a * a; return s * s; }
      case 7: { const double s = a * a * a; return s * s * a; }
      case 8: { const double s = a * a; const double q = s * s; return q * q; }
      default: return std::pow(a, p_);
    }
  }

 private:
  double p_;
  int integer_;
};

inline double weighted_sum(std::span<const double> w, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
  return s;
}

/// Tridiagonal solve with partial pivoting. sub[i] couples rows i+1 and i,
/// sup[i] couples rows i and i+1. Overwrites rhs with the solution.
/// Returns false if the matrix is numerically singular.
bool solve_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                       std::vector<double> sup, std::vector<double>& rhs);

}  // namespace nlsn::detail

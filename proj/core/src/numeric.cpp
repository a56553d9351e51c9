#include "numeric.hpp"

#include <utility>

namespace nlsn::detail {

// Gaussian elimination with row swaps, in the style of LAPACK dgtsv: a swap
// fills one extra superdiagonal (sup2).
bool solve_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                       std::vector<double> sup, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  if (n == 0) return true;
  std::vector<double> sup2(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::fabs(diag[i]) >= std::fabs(sub[i])) {
      if (diag[i] == 0.0) return false;
      const double m = sub[i] / diag[i];
      diag[i + 1] -= m * sup[i];
      rhs[i + 1] -= m * rhs[i];
    } else {
      // swap rows i and i+1
      const double m = diag[i] / sub[i];
      diag[i] = sub[i];
      const double next_diag = diag[i + 1];
      diag[i + 1] = sup[i] - m * next_diag;
      sup[i] = next_diag;
      if (i + 2 < n) {
        sup2[i] = sup[i + 1];
        sup[i + 1] = -m * sup2[i];
      }
      std::swap(rhs[i], rhs[i + 1]);
      rhs[i + 1] -= m * rhs[i];
    }
  }
  if (diag[n - 1] == 0.0) return false;
  rhs[n - 1] /= diag[n - 1];
  if (n > 1) rhs[n - 2] = (rhs[n - 2] - sup[n - 2] * rhs[n - 1]) / diag[n - 2];
  for (std::size_t k = n - 2; k-- > 0;) {
    rhs[k] = (rhs[k] - sup[k] * rhs[k + 1] - sup2[k] * rhs[k + 2]) / diag[k];
  }
  return true;
}

}  // namespace nlsn::detail

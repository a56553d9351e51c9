#pragma once

#include <limits>
#include <string>

#include "nlsn/radial_grid.hpp"

namespace nlsn {

/// 2N/(N-2) for N >= 3; +infinity for N <= 2.
double critical_exponent(int N) noexcept;

/// N(p-2)/(2p).
double gamma_exponent(double p, int N) noexcept;

/// Problem data of the coupled system with prescribed masses a and b.
struct Params {
  int N = 3;
  double p = 4.0;
  double q = 4.0;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double beta = 1.0;
  double a = 1.0;
  double b = 1.0;

  double gamma_p() const noexcept { return gamma_exponent(p, N); }
  double gamma_q() const noexcept { return gamma_exponent(q, N); }
  bool is_p_critical() const noexcept { return N >= 3 && p == critical_exponent(N); }
  bool is_q_critical() const noexcept { return N >= 3 && q == critical_exponent(N); }

  /// Throws Error(InvalidParams) naming the first violated constraint.
  /// The coupling sign is not checked here.
  void validate() const;

  friend bool operator==(const Params&, const Params&) = default;
};

/// A pair (u, v) of fields on one grid.
class PairState {
 public:
  PairState(Field u, Field v);

  const Field& u() const noexcept { return u_; }
  const Field& v() const noexcept { return v_; }
  const RadialGrid& grid() const noexcept { return u_.grid(); }
  const GridPtr& grid_ptr() const noexcept { return u_.grid_ptr(); }

  /// True when both masses match (a, b) to the given relative tolerance.
  bool on_sphere(double a, double b, double rel_tol = 1e-10) const;

 private:
  Field u_;
  Field v_;
};

}  // namespace nlsn

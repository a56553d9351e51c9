#pragma once

#include "nlsn/params.hpp"
#include "nlsn/radial_grid.hpp"

namespace nlsn {

/// Coefficients of the energy along the dilation fiber,
/// h(t) = K t^2 / 2 - A t^{exp_p} - B t^{exp_q} - L.
struct FiberCoefficients {
  double K = 0.0;
  double A = 0.0;
  double B = 0.0;
  double L = 0.0;
  double exp_p = 0.0;  ///< p * gamma_p
  double exp_q = 0.0;  ///< q * gamma_q

  double h(double t) const;
  /// t * h'(t), which is the Pohozaev functional of the dilated pair.
  double pohozaev_at(double t) const;
  double second_derivative(double t) const;
};

/// J(u, v).
double energy(const Params& params, const PairState& s);
/// J(next) - J(prev) accumulated from pointwise differences, so that its sign
/// stays reliable for changes far below the round-off of J itself.
double energy_difference(const Params& params, const PairState& next, const PairState& prev);
/// P(u, v). Independent of beta.
double pohozaev(const Params& params, const PairState& s);
FiberCoefficients fiber_coefficients(const Params& params, const PairState& s);

/// Unique t > 0 with h'(t) = 0. Throws NoMaximizer for K = 0 or A + B = 0,
/// NumericalFailure if the root cannot be certified.
double fiber_maximizer(const FiberCoefficients& c);
double fiber_maximizer(const Params& params, const PairState& s);

/// max over t > 0 of J(t * (u, v)).
double phi(const Params& params, const PairState& s);
double phi(const FiberCoefficients& c);

/// Single-equation Pohozaev functional |grad u|^2 - mu gamma_p |u|_p^p.
double single_pohozaev(double mu, double p, const Field& u, int N);

}  // namespace nlsn

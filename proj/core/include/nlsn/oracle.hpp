#pragma once

#include <cstddef>
#include <memory>

#include "nlsn/radial_grid.hpp"

namespace nlsn {

/// Grid on which ground profiles are computed. r_max is in the natural
/// length of the equation -w'' - (N-1)/r w' + w = w^{p-1}.
struct OracleGrid {
  double r_max = 28.0;
  std::size_t n_nodes = 28001;
};

struct ShootOptions {
  OracleGrid grid{};
  /// Initial bisection bracket on w(0). A non-positive upper end is found by
  /// doubling from the lower end.
  double bracket_lo = 1.0;
  double bracket_hi = 0.0;
};

/// Positive radial solution w of -Laplacian w + w = w^{p-1} with its norms.
struct GroundProfile {
  int N = 0;
  double p = 0.0;
  Field w;
  double l2_mass = 0.0;   ///< integral of w^2
  double kinetic = 0.0;   ///< integral of |grad w|^2
  double lp_power = 0.0;  ///< integral of w^p
  /// w(0) of the separatrix found by shooting, before the discrete polish.
  double shoot_parameter = 0.0;
  /// Sup-scaled residual of the discrete equation on the profile grid.
  double residual = 0.0;
};

/// Shooting on w(0) followed by a Newton polish of the discrete equation.
/// Throws BracketNotFound if no overshooting height exists and RefineGrid if
/// the discrete residual stays above tol.
GroundProfile shoot_ground(int N, double p, double tol = 1e-7, const ShootOptions& opts = {});

/// Memoized shoot_ground on the given grid. The in-process cache is shared
/// between threads; when NLS_NORMALIZED_CACHE_DIR is set, profiles are also
/// persisted there and reloaded (a corrupt file is recomputed).
std::shared_ptr<const GroundProfile> ground_profile(int N, double p, const OracleGrid& grid = {});

/// Drops the in-process cache. Disk files are left alone.
void clear_profile_cache();

/// Best constant of |u|_p <= C |grad u|^gamma |u|_2^{1-gamma}, from the
/// profile computed on `grid`.
double gn_constant(int N, double p, const OracleGrid& grid = {});

/// Multiplier of the normalized single-equation solution with mass a.
double single_lambda(double mu, double p, double a, int N, const OracleGrid& grid = {});

struct SingleGround {
  double lambda = 0.0;
  Field u;
};

/// Normalized solution u of -Laplacian u + lambda u = mu u^{p-1} with mass a,
/// returned on the profile grid shrunk by sqrt(lambda) so the discrete
/// equation holds to the profile residual.
SingleGround single_ground(double mu, double p, double a, int N, const OracleGrid& grid = {});
/// Same solution interpolated onto `target`. Throws RefineDomain when the
/// profile does not decay below 1e-10 of its peak inside target's radius.
SingleGround single_ground(double mu, double p, double a, const GridPtr& target);

/// Ground energy of the single equation with mass a from the closed form in
/// terms of the Gagliardo-Nirenberg constant.
double single_energy_closed_form(double mu, double p, double a, int N);

/// Rayleigh quotient |grad U|^2 / |U|_{2*}^2 of the Aubin-Talenti profile
/// s^{(N-2)/2} U(s r), U = (1 + r^2)^{-(N-2)/2}, N in {3, 4}.
double sobolev_quotient(int N, double s = 1.0);
/// Sobolev constant from the quotient at s = 1.
double sobolev_constant(int N);
/// Reference values N(N-2) pi (Gamma(N/2)/Gamma(N))^{2/N}, precomputed to
/// 18 digits by scripts/sobolev_constant.py.
double sobolev_constant_closed_form(int N);

inline constexpr double kSobolevConstant3 = 5.47790408953133187;
inline constexpr double kSobolevConstant4 = 10.2603986412949128;

}  // namespace nlsn

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <utility>

#include "nlsn/functionals.hpp"
#include "nlsn/params.hpp"
#include "nlsn/radial_grid.hpp"

namespace nlsn {

enum class SolveStatus { Converged, MaxIter, Collapsed, NoGroundState };

std::string_view to_string(SolveStatus status) noexcept;

/// Snapshot passed to SolverOptions::observer after every accepted step.
struct IterationInfo {
  int iteration = 0;
  double phi = 0.0;
  double pde_residual = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct SolverOptions {
  int max_iter = 50000;
  double step0 = 0.5;
  double backtrack_factor = 0.5;
  /// Bound on the norm of the preconditioned constrained gradient, relative
  /// to the norm of the state.
  double tol_grad = 1e-6;
  double tol_pde = 1e-6;
  double tol_pohozaev = 1e-8;
  std::uint64_t seed = 0;
  double collapse_threshold = 1e-10;
  std::function<void(const IterationInfo&)> observer{};

  /// Throws Error(InvalidArgument) on non-positive tolerances or a
  /// backtracking factor outside (0, 1).
  void validate() const;
};

/// Solver grid in natural units: the radius is r_max / sqrt(lambda_ref),
/// see natural_length.
struct GridSpec {
  double r_max = 16.0;
  std::size_t n_nodes = 20001;
};

/// 1 / sqrt(lambda_ref), where lambda_ref is the largest single-equation
/// multiplier among the subcritical components (1 if both are critical).
double natural_length(const Params& params);
GridPtr solver_grid(const Params& params, const GridSpec& spec = {});

/// Diagnostics of a candidate solution.
struct Residuals {
  double pde_u = 0.0;  ///< sup-scaled residual of the u equation
  double pde_v = 0.0;
  double pde = 0.0;    ///< max of the two
  double pohozaev = 0.0;         ///< |P(u, v)|
  double pohozaev_scaled = 0.0;  ///< |P(u, v)| / integral of |grad u|^2 + |grad v|^2
  double mass_error_u = 0.0;     ///< relative deviation of |u|_2^2 from a
  double mass_error_v = 0.0;
  /// Relative gap in lambda1 a + lambda2 b = (1 - gamma_p) mu1 |u|_p^p +
  /// (1 - gamma_q) mu2 |v|_q^q + 2 beta integral(uv), which every solution
  /// satisfies.
  double nehari_gap = 0.0;
};

struct SolveResult {
  PairState state;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double energy = 0.0;
  double pohozaev_residual = 0.0;  ///< scaled, as in Residuals
  double pde_residual = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIter;
  /// Product of all fiber rescalings applied by the projections.
  double total_dilation = 1.0;
};

/// Gaussians exp(-r^2 / 2 sigma^2) with sigma in [0.5, 2] natural lengths
/// drawn from `seed`, normalized to masses (a, b).
PairState init_state(const Params& params, const GridPtr& grid, std::uint64_t seed);

/// Dilates (u, v) by its fiber maximizer and renormalizes the masses,
/// repeating until |P| <= 1e-12 K or until the correction stalls.
PairState project_pohozaev(const Params& params, const PairState& s);

/// Multipliers from testing each equation against its own component.
std::pair<double, double> multipliers(const Params& params, const PairState& s);

Residuals residuals(const Params& params, const PairState& s, double lambda1, double lambda2);

/// Projected descent of the fiber-maximized energy on the mass sphere.
/// Throws NegativeCoupling for beta < 0.
SolveResult descend(const Params& params, const GridPtr& grid, const SolverOptions& opts);
SolveResult descend(const Params& params, const SolverOptions& opts, const GridSpec& spec = {});

enum class IdentityVerdict {
  IdentityViolated,       ///< lambda1 a + lambda2 b > 2 beta sqrt(ab) + tol
  Boundary,               ///< equality within tol
  LiouvilleForced,        ///< identity holds strictly; beta >= sqrt(lambda1 lambda2) forced
  NonPositiveMultiplier,  ///< lambda1 <= 0 or lambda2 <= 0
  Undefined,              ///< multipliers not finite
};

std::string_view to_string(IdentityVerdict verdict) noexcept;

struct IdentityCheck {
  bool contradiction = false;
  IdentityVerdict verdict = IdentityVerdict::Undefined;
  double lhs = 0.0;  ///< lambda1 a + lambda2 b
  double rhs = 0.0;  ///< 2 beta sqrt(ab)
  double tol = 0.0;

  explicit operator bool() const noexcept { return contradiction; }
};

/// Tests a candidate of the doubly critical system against the identity
/// lambda1 a + lambda2 b = 2 beta integral(uv) <= 2 beta sqrt(ab) and the
/// Liouville consequence for positive multipliers. Throws Misuse unless
/// p = q = 2N/(N-2).
IdentityCheck check_nonexistence_identity(const SolveResult& result, const Params& params);

}  // namespace nlsn

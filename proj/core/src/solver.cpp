#include "nlsn/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "nlsn/error.hpp"
#include "nlsn/oracle.hpp"
#include "numeric.hpp"

namespace nlsn {

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::Collapsed: return "Collapsed";
    case SolveStatus::NoGroundState: return "NoGroundState";
  }
  return "Unknown";
}

std::string_view to_string(IdentityVerdict verdict) noexcept {
  switch (verdict) {
    case IdentityVerdict::IdentityViolated: return "IdentityViolated";
    case IdentityVerdict::Boundary: return "Boundary";
    case IdentityVerdict::LiouvilleForced: return "LiouvilleForced";
    case IdentityVerdict::NonPositiveMultiplier: return "NonPositiveMultiplier";
    case IdentityVerdict::Undefined: return "Undefined";
  }
  return "Unknown";
}

void SolverOptions::validate() const {
  auto bad = [](const char* what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (max_iter < 0) bad("max_iter must be non-negative");
  if (!(step0 > 0.0)) bad("step0 must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) bad("backtrack_factor must lie in (0, 1)");
  if (!(tol_grad > 0.0)) bad("tol_grad must be positive");
  if (!(tol_pde > 0.0)) bad("tol_pde must be positive");
  if (!(tol_pohozaev > 0.0)) bad("tol_pohozaev must be positive");
  if (!(collapse_threshold > 0.0)) bad("collapse_threshold must be positive");
}

namespace {

double reference_lambda(const Params& params) {
  double ref = 0.0;
  if (!params.is_p_critical()) ref = std::max(ref, single_lambda(params.mu1, params.p, params.a, params.N));
  if (!params.is_q_critical()) ref = std::max(ref, single_lambda(params.mu2, params.q, params.b, params.N));
  return ref > 0.0 ? ref : 1.0;
}

}  // namespace

double natural_length(const Params& params) {
  params.validate();
  return 1.0 / std::sqrt(reference_lambda(params));
}

GridPtr solver_grid(const Params& params, const GridSpec& spec) {
  return build_grid(params.N, spec.r_max * natural_length(params), spec.n_nodes);
}

PairState init_state(const Params& params, const GridPtr& grid, std::uint64_t seed) {
  params.validate();
  if (grid->dimension() != params.N) {
    throw Error(ErrorKind::GridMismatch, "grid dimension differs from N");
  }
  std::mt19937_64 rng(seed);
  // Explicit 53-bit conversion: the standard distributions are not
  // reproducible across library implementations.
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double len = natural_length(params);
  const double sigma = (0.5 + 1.5 * unit()) * len;
  const Field g = Field::sample(grid, [sigma](double r) { return std::exp(-r * r / (2 * sigma * sigma)); });
  return PairState(normalize_mass(g, params.a), normalize_mass(g, params.b));
}

namespace {

struct Projection {
  PairState state;
  double dilation = 1.0;
};

Projection project(const Params& params, PairState s) {
  double total = 1.0;
  for (int k = 0; k < 16; ++k) {
    const FiberCoefficients c = fiber_coefficients(params, s);
    if (std::fabs(c.pohozaev_at(1.0)) <= 1e-12 * c.K) break;
    const double t = fiber_maximizer(c);
    if (std::fabs(t - 1.0) <= 1e-15) break;
    s = PairState(normalize_mass(dilate(s.u(), t), params.a),
                  normalize_mass(dilate(s.v(), t), params.b));
    total *= t;
  }
  return {std::move(s), total};
}

/// Everything derived from one iterate: multipliers, the Euler-Lagrange
/// gradient of J and the residuals.
struct Evaluation {
  double lambda1 = 0.0, lambda2 = 0.0;
  double Ku = 0.0, Kv = 0.0;
  double lp_u = 0.0, lq_v = 0.0, overlap = 0.0;
  std::vector<double> lap_u, lap_v;
  std::vector<double> dJu, dJv;  ///< -Lap u - mu1 u^{p-1} - beta v and symmetric
  double pde_u = 0.0, pde_v = 0.0;
};

Evaluation evaluate(const Params& params, const PairState& s) {
  Evaluation ev;
  const Field lu = laplacian(s.u());
  const Field lv = laplacian(s.v());
  ev.lap_u.assign(lu.values().begin(), lu.values().end());
  ev.lap_v.assign(lv.values().begin(), lv.values().end());
  ev.Ku = gradient_energy(s.u());
  ev.Kv = gradient_energy(s.v());
  ev.lp_u = lp_power(s.u(), params.p);
  ev.lq_v = lp_power(s.v(), params.q);
  ev.overlap = pair_inner(s.u(), s.v());
  ev.lambda1 = (params.mu1 * ev.lp_u + params.beta * ev.overlap - ev.Ku) / params.a;
  ev.lambda2 = (params.mu2 * ev.lq_v + params.beta * ev.overlap - ev.Kv) / params.b;

  const detail::AbsPower pu(params.p - 1.0), pv(params.q - 1.0);
  const auto u = s.u().values();
  const auto v = s.v().values();
  const std::size_t n = u.size();
  ev.dJu.resize(n);
  ev.dJv.resize(n);
  double gu = 0.0, gv = 0.0, su = 0.0, sv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double nu = params.mu1 * std::copysign(pu(u[i]), u[i]);
    const double nv = params.mu2 * std::copysign(pv(v[i]), v[i]);
    ev.dJu[i] = -ev.lap_u[i] - nu - params.beta * v[i];
    ev.dJv[i] = -ev.lap_v[i] - nv - params.beta * u[i];
    gu = std::max(gu, std::fabs(ev.dJu[i] + ev.lambda1 * u[i]));
    gv = std::max(gv, std::fabs(ev.dJv[i] + ev.lambda2 * v[i]));
    su = std::max({su, std::fabs(ev.lap_u[i]), std::fabs(ev.lambda1 * u[i]), std::fabs(nu),
                   std::fabs(params.beta * v[i])});
    sv = std::max({sv, std::fabs(ev.lap_v[i]), std::fabs(ev.lambda2 * v[i]), std::fabs(nv),
                   std::fabs(params.beta * u[i])});
  }
  ev.pde_u = su > 0.0 ? gu / su : 0.0;
  ev.pde_v = sv > 0.0 ? gv / sv : 0.0;
  return ev;
}

double scaled_pohozaev(const Params& params, const Evaluation& ev) {
  const double K = ev.Ku + ev.Kv;
  const double P = K - params.mu1 * params.gamma_p() * ev.lp_u - params.mu2 * params.gamma_q() * ev.lq_v;
  return K > 0.0 ? std::fabs(P) / K : std::fabs(P);
}

/// (c - Lap)^{-1} applied to a sample vector.
std::vector<double> precondition(const GridPtr& grid, std::span<const double> x, double c) {
  const Field f(grid, std::vector<double>(x.begin(), x.end()));
  const Field y = solve_shifted_laplacian(f, c);
  return {y.values().begin(), y.values().end()};
}

/// Preconditioned gradient of J restricted to the tangent space of the mass
/// sphere intersected with the Pohozaev manifold. Constraint normals (u, 0),
/// (0, v) and grad P are removed in the metric induced by the
/// preconditioner.
struct Direction {
  std::vector<double> du, dv;
  double norm = 0.0;  ///< weighted L2 norm
};

Direction descent_direction(const Params& params, const PairState& s, const Evaluation& ev, double c) {
  const GridPtr& grid = s.grid_ptr();
  const auto w = grid->weights();
  const auto u = s.u().values();
  const auto v = s.v().values();
  const std::size_t n = u.size();

  const detail::AbsPower pu(params.p - 1.0), pv(params.q - 1.0);
  std::vector<double> Pu(n), Pv(n), zero(n, 0.0);
  const double cu = params.mu1 * params.gamma_p() * params.p;
  const double cv = params.mu2 * params.gamma_q() * params.q;
  for (std::size_t i = 0; i < n; ++i) {
    Pu[i] = -2.0 * ev.lap_u[i] - cu * std::copysign(pu(u[i]), u[i]);
    Pv[i] = -2.0 * ev.lap_v[i] - cv * std::copysign(pv(v[i]), v[i]);
  }

  Direction d{precondition(grid, ev.dJu, c), precondition(grid, ev.dJv, c), 0.0};
  const std::vector<double> pu_ = precondition(grid, u, c);
  const std::vector<double> pv_ = precondition(grid, v, c);
  const std::vector<double> pPu = precondition(grid, Pu, c);
  const std::vector<double> pPv = precondition(grid, Pv, c);

  // Normals C_j = (first, second) and their preconditioned images.
  struct Pair {
    std::span<const double> first, second;
  };
  const Pair C[3] = {{u, zero}, {zero, v}, {Pu, Pv}};
  const Pair PC[3] = {{pu_, zero}, {zero, pv_}, {pPu, pPv}};
  auto inner = [&](const Pair& x, const Pair& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * (x.first[i] * y.first[i] + x.second[i] * y.second[i]);
    return acc;
  };
  Eigen::Matrix3d M;
  Eigen::Vector3d rhs;
  const Pair D{d.du, d.dv};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) M(i, j) = inner(C[i], PC[j]);
    rhs(i) = inner(C[i], D);
  }
  const Eigen::Vector3d coef = M.fullPivLu().solve(rhs);
  if (coef.allFinite()) {
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) {
        d.du[i] -= coef(j) * PC[j].first[i];
        d.dv[i] -= coef(j) * PC[j].second[i];
      }
    }
  }
  double nn = 0.0;
  for (std::size_t i = 0; i < n; ++i) nn += w[i] * (d.du[i] * d.du[i] + d.dv[i] * d.dv[i]);
  d.norm = std::sqrt(nn);
  return d;
}

PairState step_from(const Params& params, const PairState& s, const Direction& d, double tau) {
  const auto u = s.u().values();
  const auto v = s.v().values();
  const std::size_t n = u.size();
  std::vector<double> nu(n), nv(n);
  for (std::size_t i = 0; i < n; ++i) {
    nu[i] = std::max(u[i] - tau * d.du[i], 0.0);
    nv[i] = std::max(v[i] - tau * d.dv[i], 0.0);
  }
  return PairState(normalize_mass(Field(s.grid_ptr(), std::move(nu)), params.a),
                   normalize_mass(Field(s.grid_ptr(), std::move(nv)), params.b));
}

// Unbounded fiber rescaling is the signature of mass escaping to a bubble or
// to infinity. A single component with a tiny power is not a collapse: with
// a small mass it is carried by the coupling term in the linear regime.
bool collapsed(const Evaluation& ev, double dilation, double threshold) {
  return dilation > 1e6 || dilation < 1e-6 || ev.lp_u + ev.lq_v < threshold;
}

}  // namespace

PairState project_pohozaev(const Params& params, const PairState& s) {
  return project(params, s).state;
}

std::pair<double, double> multipliers(const Params& params, const PairState& s) {
  const double I = pair_inner(s.u(), s.v());
  const double l1 = (params.mu1 * lp_power(s.u(), params.p) + params.beta * I - gradient_energy(s.u())) / params.a;
  const double l2 = (params.mu2 * lp_power(s.v(), params.q) + params.beta * I - gradient_energy(s.v())) / params.b;
  return {l1, l2};
}

Residuals residuals(const Params& params, const PairState& s, double lambda1, double lambda2) {
  Evaluation ev = evaluate(params, s);
  // Recompute the PDE residuals with the supplied multipliers.
  const auto u = s.u().values();
  const auto v = s.v().values();
  double gu = 0.0, gv = 0.0, su = 0.0, sv = 0.0;
  const detail::AbsPower pu(params.p - 1.0), pv(params.q - 1.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    gu = std::max(gu, std::fabs(ev.dJu[i] + lambda1 * u[i]));
    gv = std::max(gv, std::fabs(ev.dJv[i] + lambda2 * v[i]));
    su = std::max({su, std::fabs(ev.lap_u[i]), std::fabs(lambda1 * u[i]), params.mu1 * pu(u[i]),
                   std::fabs(params.beta * v[i])});
    sv = std::max({sv, std::fabs(ev.lap_v[i]), std::fabs(lambda2 * v[i]), params.mu2 * pv(v[i]),
                   std::fabs(params.beta * u[i])});
  }
  Residuals r;
  r.pde_u = su > 0.0 ? gu / su : 0.0;
  r.pde_v = sv > 0.0 ? gv / sv : 0.0;
  r.pde = std::max(r.pde_u, r.pde_v);
  const double K = ev.Ku + ev.Kv;
  const double P = K - params.mu1 * params.gamma_p() * ev.lp_u - params.mu2 * params.gamma_q() * ev.lq_v;
  r.pohozaev = std::fabs(P);
  r.pohozaev_scaled = K > 0.0 ? r.pohozaev / K : r.pohozaev;
  r.mass_error_u = std::fabs(mass(s.u()) - params.a) / params.a;
  r.mass_error_v = std::fabs(mass(s.v()) - params.b) / params.b;
  const double lhs = lambda1 * params.a + lambda2 * params.b;
  const double rhs = (1.0 - params.gamma_p()) * params.mu1 * ev.lp_u +
                     (1.0 - params.gamma_q()) * params.mu2 * ev.lq_v + 2.0 * params.beta * ev.overlap;
  const double scale = std::max({std::fabs(lhs), std::fabs(rhs), std::numeric_limits<double>::min()});
  r.nehari_gap = std::fabs(lhs - rhs) / scale;
  return r;
}

namespace {

SolveResult finish(const Params& params, PairState state, const Evaluation& ev, int iterations,
                   SolveStatus status, double dilation, double grad_norm) {
  const double e = energy(params, state);
  const double poh = scaled_pohozaev(params, ev);
  SolveResult r{std::move(state), ev.lambda1, ev.lambda2, e, poh, std::max(ev.pde_u, ev.pde_v),
                grad_norm, iterations, status, dilation};
  return r;
}

}  // namespace

SolveResult descend(const Params& params, const GridPtr& grid, const SolverOptions& opts) {
  params.validate();
  opts.validate();
  if (params.beta < 0.0) {
    throw Error(ErrorKind::NegativeCoupling,
                "beta < 0: the system has no positive ground state; refusing the search");
  }
  const bool armed = params.is_p_critical() && params.is_q_critical();
  const double c_ref = reference_lambda(params);
  const double state_norm = std::sqrt(params.a + params.b);

  Projection pr = project(params, init_state(params, grid, opts.seed));
  PairState state = std::move(pr.state);
  double dilation = pr.dilation;
  double current_phi = energy(params, state);
  double tau = opts.step0;

  Evaluation ev = evaluate(params, state);
  double grad_norm = std::numeric_limits<double>::infinity();
  SolveStatus status = SolveStatus::MaxIter;
  int it = 0;
  int stalled = 0;
  try {
    for (;; ++it) {
      if (collapsed(ev, dilation, opts.collapse_threshold)) {
        status = SolveStatus::Collapsed;
        break;
      }
      const double c = std::max({ev.lambda1, ev.lambda2, c_ref});
      const Direction d = descent_direction(params, state, ev, c);
      grad_norm = d.norm / state_norm;
      const double pde = std::max(ev.pde_u, ev.pde_v);
      if (grad_norm <= opts.tol_grad && pde <= opts.tol_pde &&
          scaled_pohozaev(params, ev) <= opts.tol_pohozaev) {
        status = SolveStatus::Converged;
        break;
      }
      if (it >= opts.max_iter) break;

      // Backtracking on phi; every trial is projected, so phi equals J there.
      // phi is tracked through exact differences so that the accepted
      // sequence is non-increasing even below the round-off of J.
      bool accepted = false;
      Projection trial{state, 1.0};
      double change = 0.0;
      while (tau > 1e-14) {
        trial = project(params, step_from(params, state, d, tau));
        change = energy_difference(params, trial.state, state);
        if (change <= 0.0) {
          accepted = true;
          break;
        }
        tau *= opts.backtrack_factor;
      }
      if (!accepted) break;  // no descent left at this resolution
      const double decrease = -change;
      state = std::move(trial.state);
      dilation *= trial.dilation;
      current_phi += change;
      ev = evaluate(params, state);
      if (opts.observer) {
        opts.observer({it + 1, current_phi, std::max(ev.pde_u, ev.pde_v), grad_norm, tau});
      }
      // Steps that no longer move phi above round-off mean the flow has
      // reached a discrete floor; give up after a long run of them.
      stalled = decrease <= 1e-15 * std::fabs(current_phi) ? stalled + 1 : 0;
      if (stalled >= 200) {
        ++it;
        break;
      }
      tau = std::min(tau * 1.5, 8.0 * opts.step0);
    }
  } catch (const Error& e) {
    // A component vanished under truncation or the fiber lost its maximum.
    if (e.kind() != ErrorKind::InvalidArgument && e.kind() != ErrorKind::NoMaximizer) throw;
    status = SolveStatus::Collapsed;
  }

  SolveResult result = finish(params, std::move(state), ev, it, status, dilation, grad_norm);
  if (armed && result.status != SolveStatus::Collapsed &&
      check_nonexistence_identity(result, params).contradiction) {
    result.status = SolveStatus::NoGroundState;
  }
  return result;
}

SolveResult descend(const Params& params, const SolverOptions& opts, const GridSpec& spec) {
  return descend(params, solver_grid(params, spec), opts);
}

IdentityCheck check_nonexistence_identity(const SolveResult& result, const Params& params) {
  if (!params.is_p_critical() || !params.is_q_critical()) {
    throw Error(ErrorKind::Misuse, "identity check applies to p = q = 2N/(N-2) only");
  }
  IdentityCheck c;
  c.lhs = result.lambda1 * params.a + result.lambda2 * params.b;
  c.rhs = 2.0 * params.beta * std::sqrt(params.a * params.b);
  c.tol = 1e-8 * std::fabs(c.lhs);
  if (!std::isfinite(result.lambda1) || !std::isfinite(result.lambda2)) {
    c.verdict = IdentityVerdict::Undefined;
    c.contradiction = false;
    return c;
  }
  if (result.lambda1 <= 0.0 || result.lambda2 <= 0.0) {
    c.verdict = IdentityVerdict::NonPositiveMultiplier;
  } else if (c.lhs > c.rhs + c.tol) {
    c.verdict = IdentityVerdict::IdentityViolated;
  } else if (std::fabs(c.lhs - c.rhs) <= c.tol) {
    c.verdict = IdentityVerdict::Boundary;
  } else {
    c.verdict = IdentityVerdict::LiouvilleForced;
  }
  // Every branch contradicts the existence of a positive solution: the
  // identity fails, or it holds and positive multipliers then force a
  // nonnegative entire solution of a critical Lane-Emden type system, which
  // cannot exist for N = 3, 4.
  c.contradiction = true;
  return c;
}

}  // namespace nlsn

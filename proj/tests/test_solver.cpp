#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "nlsn/error.hpp"
#include "nlsn/functionals.hpp"
#include "nlsn/oracle.hpp"
#include "nlsn/solver.hpp"
#include "support.hpp"

namespace nlsn {
namespace {

Params fixture(int N, double beta) {
  Params p;
  p.N = N;
  p.p = p.q = N == 2 ? 5.0 : (N == 3 ? 4.0 : 3.5);
  p.beta = beta;
  return p;
}

Params critical(int N, double beta) {
  Params p;
  p.N = N;
  p.p = p.q = critical_exponent(N);
  p.beta = beta;
  return p;
}

std::vector<double> samples(const Field& f) { return {f.values().begin(), f.values().end()}; }

double interior_min(const Field& f) {
  return *std::min_element(f.values().begin(), f.values().end() - 1);
}

TEST(SolverOptions, Validation) {
  SolverOptions o;
  EXPECT_NO_THROW(o.validate());
  o.backtrack_factor = 1.0;
  EXPECT_THROW(o.validate(), Error);
  o = {};
  o.tol_pde = 0.0;
  EXPECT_THROW(o.validate(), Error);
  o = {};
  o.step0 = -1.0;
  EXPECT_THROW(o.validate(), Error);
}

TEST(NaturalLength, SmallerForLargerMultiplier) {
  Params p = fixture(3, 1.0);
  const double len = natural_length(p);
  EXPECT_NEAR(len, 1.0 / std::sqrt(single_lambda(1.0, 4.0, 1.0, 3)), 1e-12);
  p.a = 2.0;
  EXPECT_GT(natural_length(p), 0.0);
  EXPECT_EQ(natural_length(critical(3, 1.0)), 1.0);
}

TEST(InitState, MassesSignAndDeterminism) {
  const Params p = fixture(3, 1.0);
  const GridPtr g = solver_grid(p, {16.0, 2001});
  const PairState s = init_state(p, g, 7);
  EXPECT_TRUE(s.on_sphere(p.a, p.b, 1e-12));
  EXPECT_GT(interior_min(s.u()), 0.0);
  EXPECT_GT(interior_min(s.v()), 0.0);
  for (std::size_t i = 1; i < s.u().size(); ++i) EXPECT_LE(s.u()[i], s.u()[i - 1]);

  const PairState again = init_state(p, g, 7);
  EXPECT_EQ(samples(s.u()), samples(again.u()));
  EXPECT_EQ(samples(s.v()), samples(again.v()));
  const PairState other = init_state(p, g, 8);
  EXPECT_NE(samples(s.u()), samples(other.u()));
}

TEST(InitState, RejectsForeignGrid) {
  const Params p = fixture(3, 1.0);
  EXPECT_THROW(init_state(p, build_grid(2, 10.0, 101), 0), Error);
}

TEST(ProjectPohozaev, LandsOnTheManifoldAndIsIdempotent) {
  for (int N : {2, 3, 4}) {
    const Params p = fixture(N, 0.7);
    const GridPtr g = solver_grid(p, {16.0, 4001});
    const PairState s = init_state(p, g, 3);
    const PairState proj = project_pohozaev(p, s);
    EXPECT_TRUE(proj.on_sphere(p.a, p.b, 1e-12)) << N;
    const FiberCoefficients c = fiber_coefficients(p, proj);
    EXPECT_LE(std::fabs(pohozaev(p, proj)), 1e-10 * c.K) << N;
    // Exact up to interpolation of the dilated samples.
    EXPECT_NEAR(energy(p, proj), phi(p, s), 1e-4 * std::fabs(phi(p, s))) << N;

    const PairState twice = project_pohozaev(p, proj);
    EXPECT_LE(testing::max_abs_diff(twice.u(), proj.u()), 1e-9 * testing::max_abs(proj.u()));
  }
}

TEST(Multipliers, DecoupledPairReproducesOracle) {
  const Params p = fixture(3, 0.0);
  const GridPtr g = solver_grid(p, {26.0, 26001});
  const SingleGround w = single_ground(1.0, 4.0, 1.0, g);
  const PairState s(w.u, w.u);
  const auto [l1, l2] = multipliers(p, s);
  EXPECT_NEAR(l1, w.lambda, 1e-5 * w.lambda);
  EXPECT_EQ(l1, l2);

  const Residuals r = residuals(p, s, l1, l2);
  EXPECT_LE(r.pde, 1e-5);
  EXPECT_LE(r.pohozaev_scaled, 1e-5);
  EXPECT_LE(r.mass_error_u, 1e-5);
  EXPECT_LE(r.nehari_gap, 1e-5);
}

TEST(Multipliers, LinearInCoupling) {
  Params p = fixture(3, 0.5);
  const GridPtr g = solver_grid(p, {16.0, 4001});
  const PairState s = init_state(p, g, 11);
  const auto [a1, a2] = multipliers(p, s);
  p.beta = 1.0;
  const auto [b1, b2] = multipliers(p, s);
  const double overlap = pair_inner(s.u(), s.v());
  EXPECT_NEAR(b1 - a1, 0.5 * overlap / p.a, 1e-10 * std::fabs(b1));
  EXPECT_NEAR(b2 - a2, 0.5 * overlap / p.b, 1e-10 * std::fabs(b2));
}

TEST(Residuals, Deterministic) {
  const Params p = fixture(3, 1.0);
  const GridPtr g = solver_grid(p, {16.0, 4001});
  const PairState s = project_pohozaev(p, init_state(p, g, 0));
  const auto [l1, l2] = multipliers(p, s);
  const Residuals x = residuals(p, s, l1, l2);
  const Residuals y = residuals(p, s, l1, l2);
  EXPECT_EQ(x.pde, y.pde);
  EXPECT_EQ(x.nehari_gap, y.nehari_gap);
  EXPECT_GT(x.pde, 1e-4);  // a Gaussian is far from a solution
}

TEST(Descend, RejectsNegativeCoupling) {
  try {
    descend(fixture(3, -0.1), SolverOptions{});
    ADD_FAILURE() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NegativeCoupling);
  }
}

TEST(Descend, ConvergedFixturesArePositiveSolutions) {
  for (int N : {2, 3, 4}) {
    for (double beta : {0.5, 5.0}) {
      const Params p = fixture(N, beta);
      const SolveResult r = descend(p, SolverOptions{});
      ASSERT_EQ(r.status, SolveStatus::Converged) << N << ' ' << beta;
      EXPECT_GT(r.lambda1, 0.0);
      EXPECT_GT(r.lambda2, 0.0);
      EXPECT_GT(interior_min(r.state.u()), 0.0);
      EXPECT_GT(interior_min(r.state.v()), 0.0);
      EXPECT_LE(r.pohozaev_residual, 1e-8);
      EXPECT_LE(r.pde_residual, 1e-6);
      EXPECT_TRUE(r.state.on_sphere(p.a, p.b, 1e-10));

      const Residuals res = residuals(p, r.state, r.lambda1, r.lambda2);
      EXPECT_LE(res.nehari_gap, 1e-6);
      EXPECT_NEAR(r.energy, energy(p, r.state), 1e-12 * std::fabs(r.energy));
    }
  }
}

TEST(Descend, ObservedEnergyNeverIncreases) {
  std::vector<double> seen;
  SolverOptions o;
  o.observer = [&seen](const IterationInfo& info) { seen.push_back(info.phi); };
  const SolveResult r = descend(fixture(3, 1.0), o);
  ASSERT_EQ(r.status, SolveStatus::Converged);
  ASSERT_FALSE(seen.empty());
  for (std::size_t i = 1; i < seen.size(); ++i) {
    EXPECT_LE(seen[i], seen[i - 1] + 1e-12 * std::fabs(seen[i - 1])) << i;
  }
  EXPECT_NEAR(seen.back(), r.energy, 1e-10 * std::fabs(r.energy));
}

TEST(Descend, IndependentOfTheSeed) {
  const Params p = fixture(3, 1.0);
  std::vector<double> energies;
  for (std::uint64_t seed : {0u, 1u, 42u, 1234u}) {
    SolverOptions o;
    o.seed = seed;
    const SolveResult r = descend(p, o);
    ASSERT_EQ(r.status, SolveStatus::Converged) << seed;
    energies.push_back(r.energy);
  }
  for (double e : energies) EXPECT_NEAR(e, energies.front(), 1e-7 * std::fabs(e));
}

TEST(Descend, BitwiseReproducible) {
  const Params p = fixture(3, 2.0);
  const SolveResult x = descend(p, SolverOptions{});
  const SolveResult y = descend(p, SolverOptions{});
  EXPECT_EQ(x.energy, y.energy);
  EXPECT_EQ(x.iterations, y.iterations);
  EXPECT_EQ(samples(x.state.u()), samples(y.state.u()));
}

TEST(Descend, EnergyNonIncreasingInCoupling) {
  double prev = std::numeric_limits<double>::infinity();
  for (double beta : {0.1, 0.5, 1.0, 2.0}) {
    const SolveResult r = descend(fixture(3, beta), SolverOptions{});
    ASSERT_EQ(r.status, SolveStatus::Converged) << beta;
    EXPECT_LE(r.energy, prev + 1e-6) << beta;
    prev = r.energy;
  }
}

TEST(Descend, SmallCouplingNearDecoupledSum) {
  const Params p = fixture(3, 1e-3);
  const double sigma = 2.0 * single_energy_closed_form(1.0, 4.0, 1.0, 3);
  const SolveResult r = descend(p, SolverOptions{});
  ASSERT_EQ(r.status, SolveStatus::Converged);
  EXPECT_GE(r.energy, sigma - p.beta - 5e-3 * sigma);
  EXPECT_LE(r.energy, sigma + 5e-3 * sigma);
  EXPECT_GT(r.lambda1, 0.0);
  EXPECT_GT(r.lambda2, 0.0);
  EXPECT_LE(r.pde_residual, 1e-6);
}

// The symmetric solution is a saddle of phi on the sphere: spreading one
// component while concentrating the other lowers the fiber maximum.
TEST(Descend, SymmetricSolutionIsASaddle) {
  const Params p = fixture(3, 1.0);
  const SolveResult r = descend(p, SolverOptions{});
  ASSERT_EQ(r.status, SolveStatus::Converged);
  double prev = phi(p, r.state);
  EXPECT_NEAR(prev, r.energy, 1e-9 * r.energy);
  for (double s : {1.2, 1.5, 2.0, 3.0}) {
    const PairState split(normalize_mass(dilate(r.state.u(), s), p.a),
                          normalize_mass(dilate(r.state.v(), 1.0 / s), p.b));
    const double level = phi(p, split);
    EXPECT_LT(level, prev) << s;
    prev = level;
  }
}

TEST(Descend, DoublyCriticalNeverConverges) {
  for (int N : {3, 4}) {
    const Params p = critical(N, 1.0);
    const SolveResult r = descend(p, SolverOptions{});
    EXPECT_NE(r.status, SolveStatus::Converged) << N;
    if (std::isfinite(r.lambda1) && std::isfinite(r.lambda2)) {
      EXPECT_TRUE(check_nonexistence_identity(r, p).contradiction) << N;
    }
  }
}

TEST(Descend, TinyIterationBudgetReportsMaxIter) {
  SolverOptions o;
  o.max_iter = 2;
  const SolveResult r = descend(fixture(3, 1.0), o);
  EXPECT_EQ(r.status, SolveStatus::MaxIter);
  EXPECT_LE(r.iterations, 2);
}

SolveResult with_multipliers(double l1, double l2) {
  const Params p = critical(3, 1.0);
  const GridPtr g = solver_grid(p, {16.0, 101});
  SolveResult r{init_state(p, g, 0)};
  r.lambda1 = l1;
  r.lambda2 = l2;
  return r;
}

TEST(IdentityCheck, Verdicts) {
  const Params p = critical(3, 1.0);  // rhs = 2
  EXPECT_EQ(check_nonexistence_identity(with_multipliers(2.0, 1.0), p).verdict,
            IdentityVerdict::IdentityViolated);
  EXPECT_EQ(check_nonexistence_identity(with_multipliers(1.0, 1.0), p).verdict,
            IdentityVerdict::Boundary);
  EXPECT_EQ(check_nonexistence_identity(with_multipliers(0.5, 0.5), p).verdict,
            IdentityVerdict::LiouvilleForced);
  EXPECT_EQ(check_nonexistence_identity(with_multipliers(-0.5, 3.0), p).verdict,
            IdentityVerdict::NonPositiveMultiplier);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const IdentityCheck undefined = check_nonexistence_identity(with_multipliers(nan, 1.0), p);
  EXPECT_EQ(undefined.verdict, IdentityVerdict::Undefined);
  EXPECT_FALSE(undefined);
  EXPECT_TRUE(check_nonexistence_identity(with_multipliers(1.0, 1.0), p));
}

TEST(IdentityCheck, ProportionalPairSitsOnTheBoundary) {
  for (int N : {3, 4}) {
    const Params p = critical(N, 0.8);
    const GridPtr g = solver_grid(p, {30.0, 6001});
    SolveResult r{project_pohozaev(p, init_state(p, g, 5))};
    std::tie(r.lambda1, r.lambda2) = multipliers(p, r.state);
    const IdentityCheck c = check_nonexistence_identity(r, p);
    EXPECT_NEAR(c.lhs, c.rhs, 1e-8 * c.rhs) << N;
    EXPECT_TRUE(c.contradiction);
  }
}

TEST(IdentityCheck, SubcriticalIsMisuse) {
  try {
    check_nonexistence_identity(with_multipliers(1.0, 1.0), fixture(3, 1.0));
    ADD_FAILURE() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Misuse);
  }
}

}  // namespace
}  // namespace nlsn

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "nlsn/error.hpp"
#include "nlsn/functionals.hpp"
#include "nlsn/oracle.hpp"
#include "nlsn/params.hpp"
#include "support.hpp"

namespace nlsn {
namespace {

using std::numbers::pi;

template <class Fn>
void expect_error(ErrorKind kind, Fn&& fn, const char* fragment = nullptr) {
  try {
    fn();
    ADD_FAILURE() << "no exception thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
    if (fragment) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  }
}

Field gaussian(const GridPtr& g, double width, double target_mass) {
  return normalize_mass(
      Field::sample(g, [width](double r) { return std::exp(-0.5 * r * r / (width * width)); }),
      target_mass);
}

TEST(GammaExponent, Values) {
  EXPECT_DOUBLE_EQ(gamma_exponent(4.0, 3), 0.75);
  EXPECT_EQ(gamma_exponent(2.0, 1), 0.0);
  EXPECT_EQ(gamma_exponent(2.0, 4), 0.0);
  EXPECT_DOUBLE_EQ(gamma_exponent(6.0, 3), 1.0);
}

TEST(Params, WindowConsequences) {
  for (int N = 2; N <= 4; ++N) {
    const double lo = 2.0 + 4.0 / N;
    const double hi = N == 2 ? 12.0 : critical_exponent(N);
    for (double p = lo + 1e-3; p <= hi; p += (hi - lo) / 17.0) {
      const double g = gamma_exponent(p, N);
      EXPECT_GT(g, 0.0);
      EXPECT_LE(g, 1.0);
      EXPECT_GT(g * p, 2.0);
    }
  }
}

TEST(Params, CriticalFlags) {
  Params p;
  p.N = 3;
  p.p = 6.0;
  p.q = 4.0;
  EXPECT_TRUE(p.is_p_critical());
  EXPECT_FALSE(p.is_q_critical());
  p.N = 2;
  p.p = 6.0;
  EXPECT_FALSE(p.is_p_critical());
  EXPECT_TRUE(std::isinf(critical_exponent(2)));
  EXPECT_DOUBLE_EQ(critical_exponent(4), 4.0);
}

TEST(Params, ValidationNamesTheConstraint) {
  Params p;
  p.p = 3.0;
  expect_error(ErrorKind::InvalidParams, [&] { p.validate(); }, "2 + 4/N");
  p.p = 10.0 / 3.0;  // exactly the mass-critical exponent
  expect_error(ErrorKind::InvalidParams, [&] { p.validate(); }, "mass-supercritical");
  p.p = 6.5;
  expect_error(ErrorKind::InvalidParams, [&] { p.validate(); }, "Sobolev");
  p = Params{};
  p.a = 0.0;
  expect_error(ErrorKind::InvalidParams, [&] { p.validate(); }, "a");
  p = Params{};
  p.N = 1;
  expect_error(ErrorKind::InvalidParams, [&] { p.validate(); });
  p = Params{};
  p.N = 2;
  p.q = std::numeric_limits<double>::infinity();
  expect_error(ErrorKind::InvalidParams, [&] { p.validate(); });
  EXPECT_NO_THROW(Params{}.validate());
}

class FunctionalsTest : public ::testing::Test {
 protected:
  GridPtr grid = build_grid(3, 12.0, 2401);
  Params params{};  // N = 3, p = q = 4, mu = 1, beta = 1, a = b = 1
};

TEST_F(FunctionalsTest, ZeroState) {
  const PairState zero(Field::zeros(grid), Field::zeros(grid));
  EXPECT_EQ(energy(params, zero), 0.0);
  EXPECT_EQ(pohozaev(params, zero), 0.0);
  const FiberCoefficients c = fiber_coefficients(params, zero);
  EXPECT_EQ(c.K, 0.0);
  EXPECT_EQ(c.A, 0.0);
  EXPECT_EQ(c.B, 0.0);
  EXPECT_EQ(c.L, 0.0);
  expect_error(ErrorKind::NoMaximizer, [&] { fiber_maximizer(c); });
}

TEST_F(FunctionalsTest, SignFlipIdentity) {
  const Field u = gaussian(grid, 1.0, 1.0);
  const Field v = gaussian(grid, 1.7, 1.0);
  std::vector<double> neg(u.values().begin(), u.values().end());
  for (double& x : neg) x = -x;
  const PairState s(u, v);
  const PairState flipped(Field(grid, neg), v);
  const double overlap = pair_inner(u, v);
  EXPECT_NEAR(energy(params, flipped), energy(params, s) + 2.0 * params.beta * overlap,
              1e-13 * std::fabs(energy(params, s)));
}

TEST_F(FunctionalsTest, GaussianPairMatchesMoments) {
  // u = v = pi^{-3/4} exp(-r^2/2): |grad u|^2 = 3/2, integral of u^4 =
  // pi^{-3/2} (pi/2)^{3/2} / pi^{3/2} = (2 pi)^{-3/2}, integral of uv = 1.
  const GridPtr fine = build_grid(3, 12.0, 6001);
  const Field u = Field::sample(fine, [](double r) { return std::pow(pi, -0.75) * std::exp(-0.5 * r * r); });
  const PairState s(u, u);
  const double expected = 0.5 * 3.0 - 0.5 * std::pow(2.0 * pi, -1.5) - 1.0;
  // Second order in h = 2e-3.
  EXPECT_NEAR(energy(params, s) / expected, 1.0, 1e-5);
  EXPECT_NEAR(pohozaev(params, s) / (3.0 - 2.0 * 0.75 * std::pow(2.0 * pi, -1.5)), 1.0, 1e-5);
}

TEST_F(FunctionalsTest, PohozaevIgnoresCoupling) {
  const PairState s(gaussian(grid, 0.8, 1.0), gaussian(grid, 1.3, 2.0));
  Params p0 = params;
  p0.beta = 0.0;
  Params p7 = params;
  p7.beta = 7.0;
  EXPECT_EQ(pohozaev(p0, s), pohozaev(p7, s));
}

TEST_F(FunctionalsTest, InfiniteExponentRejected) {
  Params p = params;
  p.N = 2;
  p.q = std::numeric_limits<double>::infinity();
  const GridPtr g2 = build_grid(2, 10.0, 501);
  const PairState s(gaussian(g2, 1.0, 1.0), gaussian(g2, 1.0, 1.0));
  expect_error(ErrorKind::InvalidParams, [&] { energy(p, s); });
  expect_error(ErrorKind::InvalidParams, [&] { pohozaev(p, s); });
}

TEST_F(FunctionalsTest, FiberCoefficientsAreConsistent) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const PairState s(normalize_mass(testing::GaussianMixture(rng, 0.4, 2.0).sample(grid), 1.0),
                      normalize_mass(testing::GaussianMixture(rng, 0.4, 2.0).sample(grid), 1.0));
    const FiberCoefficients c = fiber_coefficients(params, s);
    EXPECT_GE(c.K, 0.0);
    EXPECT_GE(c.A, 0.0);
    EXPECT_GE(c.B, 0.0);
    EXPECT_GE(c.L, 0.0);
    EXPECT_DOUBLE_EQ(c.exp_p, 3.0);
    const double J = energy(params, s);
    const double P = pohozaev(params, s);
    EXPECT_NEAR(c.h(1.0), J, 1e-12 * std::fabs(J));
    EXPECT_NEAR(c.pohozaev_at(1.0), P, 1e-12 * c.K);
    // d/dt h at t = 1 by central differences equals P.
    const double d = 1e-5;
    EXPECT_NEAR((c.h(1.0 + d) - c.h(1.0 - d)) / (2.0 * d), P, 1e-7 * c.K);
  }
}

TEST_F(FunctionalsTest, MaximizerOnManifoldIsOne) {
  const PairState s(gaussian(grid, 1.0, 1.0), gaussian(grid, 1.4, 1.0));
  FiberCoefficients c = fiber_coefficients(params, s);
  const double t = fiber_maximizer(c);
  // Rescale analytically onto the manifold, then the maximizer must be 1.
  FiberCoefficients on = c;
  on.K = c.K * t * t;
  on.A = c.A * std::pow(t, c.exp_p);
  on.B = c.B * std::pow(t, c.exp_q);
  EXPECT_NEAR(fiber_maximizer(on), 1.0, 1e-10);
  EXPECT_LT(on.second_derivative(1.0), 0.0);
  EXPECT_NEAR(phi(on), on.h(1.0), 1e-10 * std::fabs(on.h(1.0)));
}

TEST_F(FunctionalsTest, MaximizerCompositionLaw) {
  const PairState s(gaussian(grid, 1.0, 1.0), gaussian(grid, 0.6, 1.0));
  const FiberCoefficients c = fiber_coefficients(params, s);
  const double t = fiber_maximizer(c);
  for (double scale : {0.5, 2.0}) {
    FiberCoefficients d = c;
    d.K = c.K * scale * scale;
    d.A = c.A * std::pow(scale, c.exp_p);
    d.B = c.B * std::pow(scale, c.exp_q);
    EXPECT_NEAR(fiber_maximizer(d) * scale / t, 1.0, 1e-8);
  }
  // The same law holds through grid dilation, up to interpolation error.
  const PairState dilated(dilate(s.u(), 1.5), dilate(s.v(), 1.5));
  EXPECT_NEAR(fiber_maximizer(params, dilated) * 1.5 / t, 1.0, 1e-4);
}

TEST_F(FunctionalsTest, MaximizerRejectsDegenerateCoefficients) {
  FiberCoefficients c;
  c.K = 1.0;
  c.exp_p = 3.0;
  c.exp_q = 3.0;
  expect_error(ErrorKind::NoMaximizer, [&] { fiber_maximizer(c); });
  c.K = 0.0;
  c.A = 1.0;
  expect_error(ErrorKind::NoMaximizer, [&] { fiber_maximizer(c); });
}

TEST_F(FunctionalsTest, PhiDominatesTheFiber) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 10; ++k) {
    const PairState s(normalize_mass(testing::GaussianMixture(rng, 0.4, 2.0).sample(grid), 1.0),
                      normalize_mass(testing::GaussianMixture(rng, 0.4, 2.0).sample(grid), 1.0));
    const FiberCoefficients c = fiber_coefficients(params, s);
    const double value = phi(c);
    EXPECT_GE(value, energy(params, s) - 1e-12 * std::fabs(value));
    for (int i = 0; i < 64; ++i) {
      const double t = std::pow(10.0, -2.0 + 4.0 * i / 63.0);
      EXPECT_GE(value, c.h(t) - 1e-12 * std::fabs(value));
    }
    EXPECT_DOUBLE_EQ(phi(params, s), value);
  }
}

TEST_F(FunctionalsTest, DecoupledPhiMatchesScan) {
  Params p = params;
  p.beta = 0.0;
  const PairState s(gaussian(grid, 1.0, 1.0), gaussian(grid, 1.0, 1.0));
  const FiberCoefficients c = fiber_coefficients(p, s);
  // h(t) = K t^2 / 2 - (A + B) t^3, maximized on a dense grid around the
  // analytic root t = K / (3 (A + B)).
  double best = -std::numeric_limits<double>::infinity();
  const double t0 = c.K / (3.0 * (c.A + c.B));
  for (int i = 0; i <= 1000000; ++i) {
    const double t = t0 * (0.5 + 1.0 * i / 1000000.0);
    best = std::max(best, 0.5 * c.K * t * t - (c.A + c.B) * t * t * t);
  }
  EXPECT_NEAR(phi(c), best, 1e-10 * best);
  EXPECT_NEAR(phi(c), c.K * c.K * c.K / (54.0 * (c.A + c.B) * (c.A + c.B)), 1e-12 * best);
}

TEST_F(FunctionalsTest, EnergyDifferenceMatchesDirectDifference) {
  std::mt19937_64 rng(1);
  const PairState s(gaussian(grid, 1.0, 1.0), gaussian(grid, 1.2, 1.0));
  std::normal_distribution<double> noise;
  for (double eps : {1e-2, 1e-5, 1e-9}) {
    std::vector<double> a(s.u().values().begin(), s.u().values().end());
    std::vector<double> b(s.v().values().begin(), s.v().values().end());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = std::max(0.0, a[i] * (1.0 + eps * noise(rng)));
      b[i] = std::max(0.0, b[i] * (1.0 + eps * noise(rng)));
    }
    const PairState t(Field(grid, a), Field(grid, b));
    const double direct = energy(params, t) - energy(params, s);
    EXPECT_NEAR(energy_difference(params, t, s), direct,
                std::max(1e-8 * std::fabs(direct), 1e-13 * std::fabs(energy(params, s))));
    EXPECT_NEAR(energy_difference(params, t, s), -energy_difference(params, s, t),
                1e-12 * std::fabs(direct) + 1e-300);
  }
  EXPECT_EQ(energy_difference(params, s, s), 0.0);
}

TEST(SinglePohozaev, BasicIdentities) {
  const GridPtr g = build_grid(3, 10.0, 1001);
  EXPECT_EQ(single_pohozaev(1.0, 4.0, Field::zeros(g), 3), 0.0);
  const Field u = gaussian(g, 1.0, 1.0);
  const double diff = single_pohozaev(2.0, 4.0, u, 3) - single_pohozaev(1.0, 4.0, u, 3);
  EXPECT_NEAR(diff, -0.75 * lp_power(u, 4.0), 1e-12 * lp_power(u, 4.0));
  EXPECT_THROW(single_pohozaev(1.0, 4.0, u, 2), Error);
}

// |P| relative to the size of its two terms.
double scaled_single_pohozaev(double p, const Field& u, int N) {
  const double terms = gradient_energy(u) + gamma_exponent(p, N) * lp_power(u, p);
  return std::fabs(single_pohozaev(1.0, p, u, N)) / terms;
}

TEST(SinglePohozaev, VanishesOnOracleProfiles) {
  for (auto [N, p] : {std::pair{3, 4.0}, {2, 5.0}, {4, 3.5}}) {
    const auto prof = ground_profile(N, p);
    EXPECT_LE(scaled_single_pohozaev(p, prof->w, N), 1e-6) << "N=" << N << " p=" << p;
    const SingleGround sg = single_ground(1.0, p, 1.0, N);
    EXPECT_LE(scaled_single_pohozaev(p, sg.u, N), 1e-6) << "N=" << N << " p=" << p;
  }
}

TEST(Pohozaev, OracleGroundPairedWithZero) {
  Params p;
  const SingleGround sg = single_ground(p.mu1, p.p, p.a, p.N);
  const PairState s(sg.u, Field::zeros(sg.u.grid_ptr()));
  EXPECT_LE(scaled_single_pohozaev(p.p, sg.u, p.N), 1e-6);
  EXPECT_EQ(pohozaev(p, s), single_pohozaev(p.mu1, p.p, sg.u, p.N));
}

}  // namespace
}  // namespace nlsn

#include "nlsn/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nlsn/error.hpp"
#include "numeric.hpp"

namespace nlsn {

double critical_exponent(int N) noexcept {
  if (N <= 2) return std::numeric_limits<double>::infinity();
  return 2.0 * N / (N - 2.0);
}

double gamma_exponent(double p, int N) noexcept { return N * (p - 2.0) / (2.0 * p); }

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidParams, what); }

void check_exponent(const char* name, double value, int N) {
  const double lower = 2.0 + 4.0 / N;
  if (std::isnan(value)) invalid(std::string(name) + " must be a number");
  // N (p - 2) > 4 rather than p > 2 + 4/N: the quotient rounds below 10/3
  // for N = 3 and would let the mass-critical exponent through.
  if (!(N * (value - 2.0) > 4.0)) {
    std::ostringstream os;
    os << name << " must exceed 2 + 4/N = " << lower << " (mass-supercritical window), got "
       << value;
    invalid(os.str());
  }
  if (!std::isfinite(value)) {
    invalid(std::string(name) + " must be finite (N = 2 has no critical exponent)");
  }
  if (value > critical_exponent(N)) {
    std::ostringstream os;
    os << name << " must not exceed the Sobolev exponent 2N/(N-2) = " << critical_exponent(N)
       << ", got " << value;
    invalid(os.str());
  }
}

void check_positive(const char* name, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    invalid(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

void Params::validate() const {
  if (N < 2 || N > 4) invalid("N must be 2, 3 or 4 for the coupled system");
  check_exponent("p", p, N);
  check_exponent("q", q, N);
  check_positive("mu1", mu1);
  check_positive("mu2", mu2);
  check_positive("a", a);
  check_positive("b", b);
  if (!std::isfinite(beta)) invalid("beta must be finite");
}

PairState::PairState(Field u, Field v) : u_(std::move(u)), v_(std::move(v)) {
  require_same_grid(u_, v_);
}

bool PairState::on_sphere(double a, double b, double rel_tol) const {
  return std::fabs(mass(u_) - a) <= rel_tol * a && std::fabs(mass(v_) - b) <= rel_tol * b;
}

double FiberCoefficients::h(double t) const {
  return 0.5 * K * t * t - A * std::pow(t, exp_p) - B * std::pow(t, exp_q) - L;
}

double FiberCoefficients::pohozaev_at(double t) const {
  return K * t * t - exp_p * A * std::pow(t, exp_p) - exp_q * B * std::pow(t, exp_q);
}

double FiberCoefficients::second_derivative(double t) const {
  return K - exp_p * (exp_p - 1.0) * A * std::pow(t, exp_p - 2.0) -
         exp_q * (exp_q - 1.0) * B * std::pow(t, exp_q - 2.0);
}

namespace {

void require_finite_exponents(const Params& params) {
  if (!std::isfinite(params.p) || !std::isfinite(params.q)) {
    throw Error(ErrorKind::InvalidParams, "infinite exponent: N = 2 runs need finite p and q");
  }
}

}  // namespace

FiberCoefficients fiber_coefficients(const Params& params, const PairState& s) {
  require_finite_exponents(params);
  FiberCoefficients c;
  c.K = gradient_energy(s.u()) + gradient_energy(s.v());
  c.A = params.mu1 / params.p * lp_power(s.u(), params.p);
  c.B = params.mu2 / params.q * lp_power(s.v(), params.q);
  c.L = params.beta * pair_inner(s.u(), s.v());
  c.exp_p = params.p * params.gamma_p();
  c.exp_q = params.q * params.gamma_q();
  return c;
}

double energy(const Params& params, const PairState& s) {
  return fiber_coefficients(params, s).h(1.0);
}

double pohozaev(const Params& params, const PairState& s) {
  require_finite_exponents(params);
  const double K = gradient_energy(s.u()) + gradient_energy(s.v());
  return K - params.mu1 * params.gamma_p() * lp_power(s.u(), params.p) -
         params.mu2 * params.gamma_q() * lp_power(s.v(), params.q);
}

double fiber_maximizer(const FiberCoefficients& c) {
  if (!(c.K > 0.0) || !(c.A + c.B > 0.0) || c.A < 0.0 || c.B < 0.0) {
    throw Error(ErrorKind::NoMaximizer, "fiber has no interior maximum (K = 0 or A + B = 0)");
  }
  if (!(c.exp_p > 2.0) || !(c.exp_q > 2.0)) {
    throw Error(ErrorKind::NoMaximizer, "fiber exponents must exceed 2");
  }
  // With s = log t, G(s) = P(t) / t^2 is strictly decreasing and concave, so
  // Newton converges from any start once it lands right of the root.
  const double ep = c.exp_p - 2.0;
  const double eq = c.exp_q - 2.0;
  const double a = c.exp_p * c.A;
  const double b = c.exp_q * c.B;
  auto G = [&](double s) { return c.K - a * std::exp(ep * s) - b * std::exp(eq * s); };
  auto dG = [&](double s) { return -ep * a * std::exp(ep * s) - eq * b * std::exp(eq * s); };
  // P(t) = t^2 G(log t), so this bounds P against the kinetic energy K t^2 of
  // the dilated pair. An absolute bound on P would accept any s once t is tiny.
  const double tol = 1e-12 * c.K;
  auto certified = [&](double s) { return std::fabs(G(s)) <= tol; };

  // Safeguarded Newton: keep a sign-change bracket and bisect whenever the
  // Newton step leaves it. From the flat left tail a bare Newton step can
  // overshoot to where the exponentials overflow.
  const double s0 = std::log(c.K / (a + b)) / std::min(ep, eq);
  const double widen = std::log(10.0);
  double lo = s0;
  double hi = s0;
  for (int k = 0; k < 400 && !(G(lo) > 0.0); ++k) lo -= widen;
  for (int k = 0; k < 400 && !(G(hi) < 0.0); ++k) hi += widen;
  if (!(G(lo) > 0.0 && G(hi) < 0.0)) {
    throw Error(ErrorKind::NumericalFailure, "fiber maximizer: no sign change found");
  }
  double s = std::clamp(s0, lo, hi);
  bool done = false;
  for (int it = 0; it < 300; ++it) {
    const double g = G(s);
    if (g > 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    if (certified(s) || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                                        std::max(1.0, std::fabs(s))) {
      done = true;
      break;
    }
    const double next = s - g / dG(s);
    s = (std::isfinite(next) && next > lo && next < hi) ? next : 0.5 * (lo + hi);
  }
  if (!done) throw Error(ErrorKind::NumericalFailure, "fiber maximizer did not converge");
  const double t_star = std::exp(s);

  // Sign structure of P along the fiber and strict maximality at t*.
  const double s_lo = s - std::log(100.0);
  const double s_hi = s + std::log(100.0);
  for (int k = 0; k < 64; ++k) {
    const double sk = s_lo + (s_hi - s_lo) * k / 63.0;
    if (std::fabs(sk - s) < 1e-9) continue;
    const double g = G(sk);
    if ((sk < s && !(g > 0.0)) || (sk > s && !(g < 0.0))) {
      throw Error(ErrorKind::NumericalFailure, "fiber derivative changes sign more than once");
    }
  }
  if (!(c.second_derivative(t_star) < 0.0)) {
    throw Error(ErrorKind::NumericalFailure, "degenerate fiber maximum");
  }
  return t_star;
}

double fiber_maximizer(const Params& params, const PairState& s) {
  return fiber_maximizer(fiber_coefficients(params, s));
}

double phi(const FiberCoefficients& c) { return c.h(fiber_maximizer(c)); }

double phi(const Params& params, const PairState& s) { return phi(fiber_coefficients(params, s)); }

double energy_difference(const Params& params, const PairState& next, const PairState& prev) {
  const auto w = prev.grid().weights();
  const auto e = prev.grid().edge_coefficients();
  const auto u1 = next.u().values(), v1 = next.v().values();
  const auto u0 = prev.u().values(), v0 = prev.v().values();
  const std::size_t n = w.size();
  auto power_change = [](double x, double y, double p) {
    // |x|^p - |y|^p without cancellation.
    x = std::fabs(x);
    y = std::fabs(y);
    if (x == y) return 0.0;
    if (std::fabs(x - y) > 0.5 * y) return std::pow(x, p) - std::pow(y, p);
    return std::pow(y, p) * std::expm1(p * std::log1p((x - y) / y));
  };
  double dK = 0.0, dLu = 0.0, dLv = 0.0, dI = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool last = i + 1 == n;
    const double a_u = (last ? 0.0 : u1[i + 1]) - u1[i];
    const double b_u = (last ? 0.0 : u0[i + 1]) - u0[i];
    const double a_v = (last ? 0.0 : v1[i + 1]) - v1[i];
    const double b_v = (last ? 0.0 : v0[i + 1]) - v0[i];
    const double du = u1[i] - u0[i];
    const double dv = v1[i] - v0[i];
    const double ddu = (last ? 0.0 : u1[i + 1] - u0[i + 1]) - du;
    const double ddv = (last ? 0.0 : v1[i + 1] - v0[i + 1]) - dv;
    dK += e[i] * (ddu * (a_u + b_u) + ddv * (a_v + b_v));
    dLu += w[i] * power_change(u1[i], u0[i], params.p);
    dLv += w[i] * power_change(v1[i], v0[i], params.q);
    dI += w[i] * (du * v1[i] + u0[i] * dv);
  }
  return 0.5 * dK - params.mu1 / params.p * dLu - params.mu2 / params.q * dLv - params.beta * dI;
}

double single_pohozaev(double mu, double p, const Field& u, int N) {
  if (u.grid().dimension() != N) {
    throw Error(ErrorKind::GridMismatch, "field grid dimension differs from N");
  }
  return gradient_energy(u) - mu * gamma_exponent(p, N) * lp_power(u, p);
}

}  // namespace nlsn

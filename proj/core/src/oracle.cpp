#include "nlsn/oracle.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "nlsn/error.hpp"
#include "nlsn/params.hpp"
#include "numeric.hpp"

namespace nlsn {

namespace {

/// |w|^{p-2} w, the odd extension of the nonlinearity.
struct OddPower {
  explicit OddPower(double p) : pow_(p - 1.0) {}
  double operator()(double w) const { return std::copysign(pow_(w), w); }
  detail::AbsPower pow_;
};

enum class Shot { Overshoot, Undershoot };

/// Right-hand side of the first-order system for (w, w').
struct RadialOde {
  int N;
  OddPower f;
  std::array<double, 2> operator()(double r, const std::array<double, 2>& y) const {
    return {y[1], -(N - 1) / r * y[1] + y[0] - f(y[0])};
  }
};

/// Even Taylor expansion w0 + c2 r^2 + c4 r^4 used for the first step, where
/// the ODE has a removable singularity.
std::array<double, 2> start_values(int N, double p, double w0, double r) {
  const double f0 = w0 - std::pow(w0, p - 1.0);
  const double df0 = 1.0 - (p - 1.0) * std::pow(w0, p - 2.0);
  const double c2 = f0 / (2.0 * N);
  const double c4 = df0 * c2 / (4.0 * N + 8.0);
  const double r2 = r * r;
  return {w0 + c2 * r2 + c4 * r2 * r2, 2.0 * c2 * r + 4.0 * c4 * r2 * r};
}

std::array<double, 2> rk4_step(const RadialOde& ode, double r, const std::array<double, 2>& y,
                               double h) {
  auto axpy = [](const std::array<double, 2>& a, double s, const std::array<double, 2>& b) {
    return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]};
  };
  const auto k1 = ode(r, y);
  const auto k2 = ode(r + 0.5 * h, axpy(y, 0.5 * h, k1));
  const auto k3 = ode(r + 0.5 * h, axpy(y, 0.5 * h, k2));
  const auto k4 = ode(r + h, axpy(y, h, k3));
  return {y[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          y[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

/// Integrates from w(0) = w0 on the grid nodes. Stops at the first sign change
/// (overshoot) or turning point (undershoot). When `out` is given, node values
/// are recorded until `stop_below * w0` is reached.
Shot shoot(int N, double p, double w0, double h, std::size_t n, std::vector<double>* out,
           double stop_below = 0.0) {
  const RadialOde ode{N, OddPower(p)};
  std::array<double, 2> y = start_values(N, p, w0, h);
  if (out) {
    out->assign(1, w0);
    out->push_back(y[0]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    y = rk4_step(ode, h * static_cast<double>(i), y, h);
    if (y[0] < 0.0) return Shot::Overshoot;
    if (y[1] > 0.0) return Shot::Undershoot;
    if (out) {
      out->push_back(y[0]);
      if (y[0] < stop_below * w0) return Shot::Undershoot;
    }
  }
  return Shot::Undershoot;
}

/// Decaying solution of the linearized equation w'' + (N-1)/r w' = w.
double tail_shape(int N, double r) {
  const double nu = std::fabs(0.5 * N - 1.0);
  return std::pow(r, 1.0 - 0.5 * N) * std::cyl_bessel_k(nu, r);
}

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

/// Sup-scaled residual of -Laplacian w + w - w^{p-1} and the raw residual.
double discrete_residual(const Field& w, double p, std::vector<double>* raw) {
  const Field lap = laplacian(w);
  const OddPower f(p);
  const auto v = w.values();
  std::vector<double> g(v.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double nl = f(v[i]);
    g[i] = -lap[i] + v[i] - nl;
    scale = std::max({scale, std::fabs(lap[i]), std::fabs(v[i]), std::fabs(nl)});
  }
  const double res = sup_abs(g) / scale;
  if (raw) *raw = std::move(g);
  return res;
}

/// Newton iteration for the discrete equation. The Jacobian is indefinite
/// (the ground state has Morse index one), hence the pivoted solver.
Field polish(Field w, double p, double tol) {
  const RadialGrid& grid = w.grid();
  const auto e = grid.edge_coefficients();
  const auto wt = grid.weights();
  const std::size_t n = grid.size();
  const detail::AbsPower pw(p - 2.0);
  double best = discrete_residual(w, p, nullptr);
  for (int it = 0; it < 40 && best > 1e-14; ++it) {
    std::vector<double> g;
    discrete_residual(w, p, &g);
    std::vector<double> sub(n - 1), sup(n - 1), diag(n), rhs(n);
    const auto v = w.values();
    // Pointwise rows: the weights span many orders of magnitude between the
    // origin and r_max, and pivoting on the weighted rows would ignore the
    // small ones.
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = (e[i] + (i > 0 ? e[i - 1] : 0.0)) / wt[i] + 1.0 - (p - 1.0) * pw(v[i]);
      rhs[i] = -g[i];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      sub[i] = -e[i] / wt[i + 1];
      sup[i] = -e[i] / wt[i];
    }
    if (!detail::solve_tridiagonal(std::move(sub), std::move(diag), std::move(sup), rhs)) {
      throw Error(ErrorKind::NumericalFailure, "singular Jacobian in profile polish");
    }
    std::vector<double> next(v.begin(), v.end());
    for (std::size_t i = 0; i < n; ++i) next[i] += rhs[i];
    Field candidate(w.grid_ptr(), std::move(next));
    const double res = discrete_residual(candidate, p, nullptr);
    if (!(res < best)) break;
    best = res;
    w = std::move(candidate);
  }
  if (best > tol) {
    std::ostringstream os;
    os << "profile residual " << best << " above tolerance " << tol << "; refine the grid";
    throw Error(ErrorKind::RefineGrid, os.str());
  }
  return w;
}

}  // namespace

GroundProfile shoot_ground(int N, double p, double tol, const ShootOptions& opts) {
  if (N < 1 || N > 4) throw Error(ErrorKind::InvalidArgument, "oracle dimension must be 1..4");
  if (!(p > 2.0) || !(p < critical_exponent(N))) {
    throw Error(ErrorKind::InvalidArgument,
                "oracle exponent must satisfy 2 < p < 2N/(N-2) (subcritical)");
  }
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  const GridPtr grid = build_grid(N, opts.grid.r_max, opts.grid.n_nodes);
  const double h = grid->spacing();
  const std::size_t n = grid->size();

  double lo = opts.bracket_lo > 0.0 ? opts.bracket_lo : 1.0;
  if (shoot(N, p, lo, h, n, nullptr) != Shot::Undershoot) {
    throw Error(ErrorKind::BracketNotFound, "lower shooting height does not undershoot");
  }
  double hi = opts.bracket_hi > lo ? opts.bracket_hi : 2.0 * lo;
  for (int k = 0; shoot(N, p, hi, h, n, nullptr) != Shot::Overshoot; ++k) {
    if (k >= 60) {
      throw Error(ErrorKind::BracketNotFound,
                  "no overshooting height found; r_max too small for this profile");
    }
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (shoot(N, p, mid, h, n, nullptr) == Shot::Overshoot ? hi : lo) = mid;
  }
  const double w0 = 0.5 * (lo + hi);

  // Trust the trajectory down to 1e-5 w0, then continue with the decaying
  // solution of the linearized tail equation.
  std::vector<double> values;
  shoot(N, p, lo, h, n, &values, 1e-5);
  const auto r = grid->nodes();
  std::size_t m = values.size() - 1;
  while (m > 1 && !(values[m] > 0.0 && values[m] < values[m - 1])) --m;
  values.resize(n, 0.0);
  const double shape_m = tail_shape(N, r[m]);
  for (std::size_t i = m + 1; i < n; ++i) values[i] = values[m] * tail_shape(N, r[i]) / shape_m;

  Field w = polish(Field(grid, std::move(values)), p, tol);
  const auto v = w.values();
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i - 1] < 1e-12 * v[0]) break;
    if (!(v[i] > 0.0) || !(v[i] < v[i - 1])) {
      throw Error(ErrorKind::NumericalFailure, "polished profile is not positive and decreasing");
    }
  }
  if (v[n - 1] > 1e-10) {
    throw Error(ErrorKind::RefineDomain, "profile has not decayed at r_max");
  }

  const double residual = discrete_residual(w, p, nullptr);
  const double l2 = mass(w);
  const double k = gradient_energy(w);
  const double lp = lp_power(w, p);
  return GroundProfile{N, p, std::move(w), l2, k, lp, w0, residual};
}

namespace {

using CacheKey = std::tuple<int, double, double, std::size_t>;

std::shared_mutex& cache_mutex() {
  static std::shared_mutex m;
  return m;
}

std::map<CacheKey, std::shared_ptr<const GroundProfile>>& cache() {
  static std::map<CacheKey, std::shared_ptr<const GroundProfile>> c;
  return c;
}

constexpr std::array<char, 4> kMagic{'N', 'L', 'S', 'G'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 1469598103934665603ULL) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::filesystem::path cache_file(const std::filesystem::path& dir, int N, double p,
                                 const OracleGrid& g) {
  std::ostringstream os;
  os << "profile_N" << N << "_p" << std::hex << std::bit_cast<std::uint64_t>(p) << "_r"
     << std::bit_cast<std::uint64_t>(g.r_max) << std::dec << "_n" << g.n_nodes << ".bin";
  return dir / os.str();
}

// Layout: magic, version, N, p, r_max, n, w0, residual, values[n], checksum
// of everything before it.
struct Header {
  std::array<char, 4> magic;
  std::uint32_t version;
  std::int32_t N;
  std::uint32_t pad;
  double p;
  double r_max;
  std::uint64_t n;
  double w0;
  double residual;
};

std::shared_ptr<const GroundProfile> load_profile(const std::filesystem::path& file, int N,
                                                  double p, const OracleGrid& g) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return nullptr;
  Header hd{};
  if (!in.read(reinterpret_cast<char*>(&hd), sizeof hd)) return nullptr;
  if (hd.magic != kMagic || hd.version != kVersion || hd.N != N || hd.p != p ||
      hd.r_max != g.r_max || hd.n != g.n_nodes) {
    return nullptr;
  }
  std::vector<double> values(g.n_nodes);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    return nullptr;
  }
  std::uint64_t stored = 0;
  if (!in.read(reinterpret_cast<char*>(&stored), sizeof stored)) return nullptr;
  const std::uint64_t sum = fnv1a(values.data(), values.size() * sizeof(double),
                                  fnv1a(&hd, sizeof hd));
  if (sum != stored) return nullptr;
  try {
    Field w(build_grid(N, g.r_max, g.n_nodes), std::move(values));
    const double m = mass(w);
    const double k = gradient_energy(w);
    const double lp = lp_power(w, p);
    return std::make_shared<const GroundProfile>(
        GroundProfile{N, p, std::move(w), m, k, lp, hd.w0, hd.residual});
  } catch (const Error&) {
    return nullptr;
  }
}

void store_profile(const std::filesystem::path& file, const GroundProfile& prof,
                   const OracleGrid& g) {
  Header hd{};
  hd.magic = kMagic;
  hd.version = kVersion;
  hd.N = prof.N;
  hd.p = prof.p;
  hd.r_max = g.r_max;
  hd.n = g.n_nodes;
  hd.w0 = prof.shoot_parameter;
  hd.residual = prof.residual;
  const auto v = prof.w.values();
  const std::uint64_t sum = fnv1a(v.data(), v.size() * sizeof(double), fnv1a(&hd, sizeof hd));
  std::error_code ec;
  std::filesystem::create_directories(file.parent_path(), ec);
  auto tmp = file;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return;  // the cache is an optimization; failing to write is not an error
    out.write(reinterpret_cast<const char*>(&hd), sizeof hd);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(&sum), sizeof sum);
    if (!out) {
      std::filesystem::remove(tmp, ec);
      return;
    }
  }
  std::filesystem::rename(tmp, file, ec);
  if (ec) std::filesystem::remove(tmp, ec);
}

}  // namespace

std::shared_ptr<const GroundProfile> ground_profile(int N, double p, const OracleGrid& grid) {
  const CacheKey key{N, p, grid.r_max, grid.n_nodes};
  {
    std::shared_lock lock(cache_mutex());
    auto it = cache().find(key);
    if (it != cache().end()) return it->second;
  }
  std::shared_ptr<const GroundProfile> prof;
  std::filesystem::path file;
  if (const char* dir = std::getenv("NLS_NORMALIZED_CACHE_DIR"); dir && *dir) {
    file = cache_file(dir, N, p, grid);
    prof = load_profile(file, N, p, grid);
  }
  if (!prof) {
    ShootOptions opts;
    opts.grid = grid;
    auto fresh = std::make_shared<GroundProfile>(shoot_ground(N, p, 1e-7, opts));
    if (!file.empty()) store_profile(file, *fresh, grid);
    prof = std::move(fresh);
  }
  std::unique_lock lock(cache_mutex());
  return cache().try_emplace(key, std::move(prof)).first->second;
}

void clear_profile_cache() {
  std::unique_lock lock(cache_mutex());
  cache().clear();
}

double gn_constant(int N, double p, const OracleGrid& grid) {
  if (p == 2.0) return 1.0;
  const auto prof = ground_profile(N, p, grid);
  const double g = gamma_exponent(p, N);
  return std::pow(prof->lp_power, 1.0 / p) /
         (std::pow(prof->kinetic, 0.5 * g) * std::pow(prof->l2_mass, 0.5 * (1.0 - g)));
}

namespace {

void check_single(double mu, double p, double a, int N) {
  if (!(mu > 0.0) || !(a > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "mu and a must be positive");
  }
  if (!(p > 2.0 + 4.0 / N) || !(p < critical_exponent(N))) {
    throw Error(ErrorKind::InvalidArgument,
                "single-equation solution needs 2 + 4/N < p < 2N/(N-2)");
  }
}

}  // namespace

double single_lambda(double mu, double p, double a, int N, const OracleGrid& grid) {
  check_single(mu, p, a, N);
  const auto prof = ground_profile(N, p, grid);
  const double pg = p * gamma_exponent(p, N);
  return std::pow(a * std::pow(mu, 2.0 / (p - 2.0)) / prof->l2_mass, (p - 2.0) / (2.0 - pg));
}

SingleGround single_ground(double mu, double p, double a, int N, const OracleGrid& grid) {
  const double lambda = single_lambda(mu, p, a, N, grid);
  const auto prof = ground_profile(N, p, grid);
  const double amp = std::pow(lambda / mu, 1.0 / (p - 2.0));
  std::vector<double> v(prof->w.values().begin(), prof->w.values().end());
  for (double& x : v) x *= amp;
  return {lambda, Field(prof->w.grid().scaled(std::sqrt(lambda)), std::move(v))};
}

SingleGround single_ground(double mu, double p, double a, const GridPtr& target) {
  if (!target) throw Error(ErrorKind::InvalidArgument, "null grid");
  SingleGround sg = single_ground(mu, p, a, target->dimension());
  const MonotoneCubic interp(sg.u);
  if (interp(target->r_max()) > 1e-10 * sg.u[0]) {
    std::ostringstream os;
    os << "target radius " << target->r_max() << " cuts the profile (natural radius "
       << target->r_max() * std::sqrt(sg.lambda) << "); enlarge r_max";
    throw Error(ErrorKind::RefineDomain, os.str());
  }
  return {sg.lambda, resample(sg.u, target)};
}

double single_energy_closed_form(double mu, double p, double a, int N) {
  check_single(mu, p, a, N);
  const double g = gamma_exponent(p, N);
  const double pg = p * g;
  const double C = gn_constant(N, p);
  const double base = g * std::pow(C, p) * mu * std::pow(a, 0.5 * (p - pg));
  return (0.5 - 1.0 / pg) * std::pow(base, 2.0 / (2.0 - pg));
}

double sobolev_quotient(int N, double s) {
  if (N != 3 && N != 4) throw Error(ErrorKind::InvalidArgument, "Sobolev constant needs N = 3 or 4");
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
  const double R = 1000.0;
  const GridPtr grid = build_grid(N, R, 100001);
  const double crit = critical_exponent(N);
  const double amp = std::pow(s, 0.5 * (N - 2));
  const auto r = grid->nodes();
  const auto w = grid->weights();
  double K = 0.0, L = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x = s * r[i];
    const double base = 1.0 + x * x;
    const double U = amp * std::pow(base, -0.5 * (N - 2));
    const double dU = -amp * s * (N - 2) * x * std::pow(base, -0.5 * N);
    K += w[i] * dU * dU;
    L += w[i] * std::pow(U, crit);
  }
  // Tails beyond R from the large-r expansions; both integrals are invariant
  // under the rescaling, so they depend on s R only.
  const double om = grid->sphere_area();
  const double Rs = s * R;
  K += om * (N - 2) * (N - 2) * (std::pow(Rs, 2.0 - N) / (N - 2) - std::pow(Rs, -N));
  L += om * (std::pow(Rs, -N) / N - N * std::pow(Rs, -N - 2.0) / (N + 2));
  return K / std::pow(L, 2.0 / crit);
}

double sobolev_constant(int N) { return sobolev_quotient(N, 1.0); }

double sobolev_constant_closed_form(int N) {
  switch (N) {
    case 3: return kSobolevConstant3;
    case 4: return kSobolevConstant4;
    default: throw Error(ErrorKind::InvalidArgument, "Sobolev constant needs N = 3 or 4");
  }
}

}  // namespace nlsn

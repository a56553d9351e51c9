#include "nlsn/radial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nlsn/error.hpp"
#include "numeric.hpp"

namespace nlsn {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NoMaximizer: return "NoMaximizer";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::BracketNotFound: return "BracketNotFound";
    case ErrorKind::RefineGrid: return "RefineGrid";
    case ErrorKind::RefineDomain: return "RefineDomain";
    case ErrorKind::NegativeCoupling: return "NegativeCoupling";
    case ErrorKind::Misuse: return "Misuse";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {

double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace

RadialGrid::RadialGrid(int dimension, double r_max, std::size_t n_nodes)
    : dimension_(dimension),
      r_max_(r_max),
      spacing_(r_max / static_cast<double>(n_nodes - 1)),
      sphere_area_(unit_sphere_area(dimension)),
      nodes_(n_nodes),
      weights_(n_nodes),
      edges_(n_nodes) {
  const double h = spacing_;
  const int N = dimension_;
  const std::size_t n = n_nodes;
  for (std::size_t i = 0; i < n; ++i) nodes_[i] = h * static_cast<double>(i);
  nodes_[n - 1] = r_max_;

  std::vector<double> c(n, 1.0);
  c[0] = 0.5;
  c[n - 1] = 3.0 / 8.0;
  c[n - 2] = 7.0 / 6.0;
  c[n - 3] = 23.0 / 24.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights_[i] = sphere_area_ * h * c[i] * std::pow(nodes_[i], N - 1);
  }
  // Origin: the trapezoid weight vanishes for N >= 2 but the Laplacian needs
  // a positive volume there.
  switch (N) {
    case 2: weights_[0] = sphere_area_ * h * h / 12.0; break;
    case 3: weights_[0] = sphere_area_ * h * h * h / 24.0; break;
    case 4: weights_[0] = sphere_area_ * std::pow(h, 4) / 64.0; break;
    default: break;
  }
  if (N >= 3) {
    // Make constants integrate exactly. The defect of the rule on r^{N-1}
    // sits at the origin only (the right-end rule is exact for cubics), so it
    // is computed once in units of h on a short reference grid rather than by
    // differencing two sums of size r_max^N.
    constexpr int m = 15;
    double units = 0.0;
    for (int i = 1; i <= m; ++i) {
      const double ci = i == m ? 3.0 / 8.0 : i == m - 1 ? 7.0 / 6.0 : i == m - 2 ? 23.0 / 24.0 : 1.0;
      units += ci * std::pow(static_cast<double>(i), N - 1);
    }
    units += weights_[0] / (sphere_area_ * std::pow(h, N));
    units -= std::pow(static_cast<double>(m), N) / N;
    weights_[1] -= sphere_area_ * std::pow(h, N) * units;
  }

  double enclosed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    enclosed += weights_[i];
    const double r_half = h * (static_cast<double>(i) + 0.5);
    edges_[i] = N * enclosed / (r_half * h);
  }
}

GridPtr RadialGrid::build(int dimension, double r_max, std::size_t n_nodes) {
  if (dimension < 1 || dimension > 4) {
    throw Error(ErrorKind::InvalidArgument,
                "grid dimension must be in {1,2,3,4}, got " + std::to_string(dimension));
  }
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw Error(ErrorKind::InvalidArgument, "grid r_max must be positive and finite");
  }
  if (n_nodes < 16) {
    throw Error(ErrorKind::InvalidArgument, "grid needs at least 16 nodes");
  }
  return GridPtr(new RadialGrid(dimension, r_max, n_nodes));
}

GridPtr RadialGrid::scaled(double t) const {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale factor must be positive");
  return build(dimension_, r_max_ / t, nodes_.size());
}

GridPtr build_grid(int dimension, double r_max, std::size_t n_nodes) {
  return RadialGrid::build(dimension, r_max, n_nodes);
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw Error(ErrorKind::InvalidArgument, "field without grid");
  if (values_.size() != grid_->size()) {
    throw Error(ErrorKind::GridMismatch, "field has " + std::to_string(values_.size()) +
                                             " samples, grid has " +
                                             std::to_string(grid_->size()) + " nodes");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NumericalFailure, "non-finite field sample");
  }
}

Field Field::zeros(GridPtr grid) {
  const std::size_t n = grid->size();
  return Field(std::move(grid), std::vector<double>(n, 0.0));
}

bool Field::is_nonnegative() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

void require_same_grid(const RadialGrid& grid, const Field& f) {
  if (&grid != &f.grid() && grid.signature() != f.grid().signature()) {
    throw Error(ErrorKind::GridMismatch, "field does not live on the given grid");
  }
}

void require_same_grid(const Field& f, const Field& g) { require_same_grid(f.grid(), g); }

double integrate(const RadialGrid& grid, const Field& f) {
  require_same_grid(grid, f);
  return detail::weighted_sum(grid.weights(), f.values());
}

double integrate(const Field& f) { return integrate(f.grid(), f); }

Field laplacian(const RadialGrid& grid, const Field& f) {
  require_same_grid(grid, f);
  const auto u = f.values();
  const auto e = grid.edge_coefficients();
  const auto w = grid.weights();
  const std::size_t n = u.size();
  std::vector<double> out(n);
  double flux_in = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? u[i + 1] : 0.0;
    const double flux_out = e[i] * (next - u[i]);
    out[i] = (flux_out - flux_in) / w[i];
    flux_in = flux_out;
  }
  return Field(f.grid_ptr(), std::move(out));
}

Field laplacian(const Field& f) { return laplacian(f.grid(), f); }

double gradient_inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  const auto a = f.values();
  const auto b = g.values();
  const auto e = f.grid().edge_coefficients();
  const std::size_t n = a.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = (i + 1 < n ? a[i + 1] : 0.0) - a[i];
    const double db = (i + 1 < n ? b[i + 1] : 0.0) - b[i];
    s += e[i] * da * db;
  }
  return s;
}

double gradient_energy(const Field& f) { return gradient_inner(f, f); }

MonotoneCubic::MonotoneCubic(const Field& f)
    : h_(f.grid().spacing()),
      r_max_(f.grid().r_max()),
      y_(f.values().begin(), f.values().end()),
      d_() {
  // The Dirichlet ghost node at r_max + h holds zero, exactly as in the
  // Laplacian. Interpolating towards it keeps dilated samples consistent with
  // the boundary condition instead of cutting them off at r_max.
  y_.push_back(0.0);
  const std::size_t n = y_.size();
  d_.assign(n, 0.0);
  // d_[0] stays zero: radial functions are even in r. Elsewhere centered
  // slopes, limited to 3 min(|left|, |right|) so that every interval stays
  // monotone. The centered slope keeps second order accuracy near the origin
  // where the data are flat.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double left = (y_[i] - y_[i - 1]) / h_;
    const double right = (y_[i + 1] - y_[i]) / h_;
    if (left * right > 0.0) {
      const double bound = 3.0 * std::min(std::fabs(left), std::fabs(right));
      d_[i] = std::copysign(std::min(std::fabs(0.5 * (left + right)), bound), left);
    }
  }
}

double MonotoneCubic::operator()(double r) const {
  if (r < 0.0) r = -r;
  if (r >= r_max_ + h_) return 0.0;
  const std::size_t n = y_.size();
  std::size_t k = static_cast<std::size_t>(r / h_);
  if (k >= n - 1) k = n - 2;
  const double s = r / h_ - static_cast<double>(k);
  const double y0 = y_[k];
  const double y1 = y_[k + 1];
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double v = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h_ * d_[k] +
                   (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h_ * d_[k + 1];
  return std::clamp(v, std::min(y0, y1), std::max(y0, y1));
}

Field dilate(const RadialGrid& grid, const Field& f, double t) {
  require_same_grid(grid, f);
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorKind::InvalidArgument, "dilation factor must be positive");
  }
  if (t == 1.0) return f;
  const MonotoneCubic interp(f);
  const double amp = std::pow(t, 0.5 * grid.dimension());
  const auto r = grid.nodes();
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = amp * interp(t * r[i]);
  return Field(f.grid_ptr(), std::move(out));
}

Field dilate(const Field& f, double t) { return dilate(f.grid(), f, t); }

Field resample(const Field& f, GridPtr target) {
  const MonotoneCubic interp(f);
  const auto r = target->nodes();
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = interp(r[i]);
  return Field(std::move(target), std::move(out));
}

double pair_inner(const RadialGrid& grid, const Field& f, const Field& g) {
  require_same_grid(grid, f);
  require_same_grid(grid, g);
  const auto w = grid.weights();
  const auto a = f.values();
  const auto b = g.values();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

double pair_inner(const Field& f, const Field& g) { return pair_inner(f.grid(), f, g); }

double mass(const Field& f) { return pair_inner(f, f); }

Field normalize_mass(const RadialGrid& grid, const Field& f, double target) {
  require_same_grid(grid, f);
  if (!(target > 0.0)) throw Error(ErrorKind::InvalidArgument, "target mass must be positive");
  const double m = pair_inner(grid, f, f);
  if (!(m > 0.0)) throw Error(ErrorKind::InvalidArgument, "cannot normalize a zero field");
  const double scale = std::sqrt(target / m);
  std::vector<double> out(f.values().begin(), f.values().end());
  for (double& v : out) v *= scale;
  return Field(f.grid_ptr(), std::move(out));
}

Field normalize_mass(const Field& f, double target) { return normalize_mass(f.grid(), f, target); }

double lp_power(const Field& f, double p) {
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "L^p exponent must be >= 1");
  const detail::AbsPower pw(p);
  const auto w = f.grid().weights();
  const auto v = f.values();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * pw(v[i]);
  return s;
}

double lp_norm(const RadialGrid& grid, const Field& f, double p) {
  require_same_grid(grid, f);
  return std::pow(lp_power(f, p), 1.0 / p);
}

Field solve_shifted_laplacian(const Field& rhs, double shift) {
  if (!(shift > 0.0)) throw Error(ErrorKind::InvalidArgument, "shift must be positive");
  const RadialGrid& g = rhs.grid();
  const auto e = g.edge_coefficients();
  const auto w = g.weights();
  const std::size_t n = g.size();
  // (shift + W^{-1} A) x = rhs with A the stiffness matrix of the edge form,
  // kept in pointwise rows so that all rows have comparable scale.
  std::vector<double> sub(n - 1), sup(n - 1), diag(n), b(rhs.values().begin(), rhs.values().end());
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = shift + (e[i] + (i > 0 ? e[i - 1] : 0.0)) / w[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    sub[i] = -e[i] / w[i + 1];
    sup[i] = -e[i] / w[i];
  }
  if (!detail::solve_tridiagonal(std::move(sub), std::move(diag), std::move(sup), b)) {
    throw Error(ErrorKind::NumericalFailure, "singular shifted Laplacian");
  }
  return Field(rhs.grid_ptr(), std::move(b));
}

}  // namespace nlsn

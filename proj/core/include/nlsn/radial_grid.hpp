#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace nlsn {

class RadialGrid;
using GridPtr = std::shared_ptr<const RadialGrid>;

/// Value identity of a grid. Two grids with equal signatures are
/// interchangeable.
struct GridSignature {
  int dimension = 0;
  double r_max = 0.0;
  std::size_t n_nodes = 0;

  friend bool operator==(const GridSignature&, const GridSignature&) = default;
};

/// Uniform radial grid r_i = i*h on [0, r_max] for radially symmetric
/// functions on R^N.
///
/// Quadrature weights include the surface area of the unit sphere and the
/// r^{N-1} Jacobian, so that sum_i w_i f(r_i) approximates the integral of f
/// over the ball of radius r_max. The interior uses trapezoid weights, the
/// outer end uses fourth-order Gregory corrections and the origin carries a
/// small positive weight (an Euler-Maclaurin correction for N = 2, the volume
/// of the ball of radius h/2 otherwise). Constants integrate exactly.
///
/// The Dirichlet form sum_e c_e (f_{e+1} - f_e)^2 uses edge coefficients
/// c_e = N V_e / (r_{e+1/2} h) where V_e is the discrete volume enclosed by
/// node e. The last edge couples to a ghost node at r_max + h holding zero.
/// The Laplacian is -W^{-1} times the gradient of half this form, which makes
/// it self-adjoint in the weighted inner product, exact on quadratics, and
/// equal to N f''(0) at the origin.
///
/// Every quantity scales exactly under r_max -> r_max / t: weights as t^{-N},
/// edge coefficients as t^{2-N}.
class RadialGrid {
 public:
  static GridPtr build(int dimension, double r_max, std::size_t n_nodes);

  int dimension() const noexcept { return dimension_; }
  double r_max() const noexcept { return r_max_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double spacing() const noexcept { return spacing_; }
  /// Surface area of the unit (N-1)-sphere.
  double sphere_area() const noexcept { return sphere_area_; }

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  /// Coefficient of edge (i, i+1); the last entry is the ghost edge.
  std::span<const double> edge_coefficients() const noexcept { return edges_; }

  GridSignature signature() const noexcept {
    return {dimension_, r_max_, nodes_.size()};
  }

  /// The grid of the dilated function t*f: same node count, radius r_max / t.
  GridPtr scaled(double t) const;

 private:
  RadialGrid(int dimension, double r_max, std::size_t n_nodes);

  int dimension_;
  double r_max_;
  double spacing_;
  double sphere_area_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> edges_;
};

/// Samples of one radial function at the nodes of a grid. Immutable.
class Field {
 public:
  Field(GridPtr grid, std::vector<double> values);

  /// Samples f(r_i) of a callable.
  template <class Fn>
  static Field sample(GridPtr grid, Fn&& fn) {
    std::vector<double> v(grid->size());
    const auto r = grid->nodes();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(r[i]);
    return Field(std::move(grid), std::move(v));
  }

  static Field zeros(GridPtr grid);

  const RadialGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  bool is_nonnegative() const noexcept;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

GridPtr build_grid(int dimension, double r_max, std::size_t n_nodes);

/// Throws GridMismatch unless f lives on a grid equal to `grid`.
void require_same_grid(const RadialGrid& grid, const Field& f);
void require_same_grid(const Field& f, const Field& g);

/// Sum of weights times values.
double integrate(const RadialGrid& grid, const Field& f);
double integrate(const Field& f);

/// Discrete radial Laplacian f'' + (N-1)/r f'.
Field laplacian(const RadialGrid& grid, const Field& f);
Field laplacian(const Field& f);

/// Integral of |grad f|^2 from the edge form.
double gradient_energy(const Field& f);
/// Bilinear form whose diagonal is gradient_energy.
double gradient_inner(const Field& f, const Field& g);

/// (t * f)(r) = t^{N/2} f(t r) by monotone cubic interpolation, decaying to
/// zero at the ghost node r_max + h. t = 1 returns the samples unchanged.
Field dilate(const RadialGrid& grid, const Field& f, double t);
Field dilate(const Field& f, double t);

/// f scaled so that the integral of f^2 equals `target`.
Field normalize_mass(const RadialGrid& grid, const Field& f, double target);
Field normalize_mass(const Field& f, double target);

/// (integral |f|^p)^{1/p}.
double lp_norm(const RadialGrid& grid, const Field& f, double p);
/// integral |f|^p, without the root.
double lp_power(const Field& f, double p);
/// Integral of f g.
double pair_inner(const RadialGrid& grid, const Field& f, const Field& g);
double pair_inner(const Field& f, const Field& g);
/// Integral of f^2.
double mass(const Field& f);

/// Solves (shift - Laplacian) x = rhs on the grid, shift > 0.
Field solve_shifted_laplacian(const Field& rhs, double shift);

/// Piecewise monotone cubic Hermite interpolant of grid samples (centered
/// slopes with the Fritsch-Carlson limiter).
/// The derivative at the origin is pinned to zero (even extension). A ghost
/// sample of zero sits at r_max + h, matching the Dirichlet condition of the
/// Laplacian; the interpolant vanishes from there on. Between two nodes the value stays in the
/// closed range of the endpoint samples.
class MonotoneCubic {
 public:
  explicit MonotoneCubic(const Field& f);
  double operator()(double r) const;

 private:
  double h_;
  double r_max_;
  std::vector<double> y_;
  std::vector<double> d_;
};

/// Evaluates f at arbitrary radii of another grid.
Field resample(const Field& f, GridPtr target);

}  // namespace nlsn

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "chemostab/error.hpp"

namespace chemostab {

/// Node-centred uniform mesh on the interval (0, Lx) or the rectangle
/// (0, Lx) x (0, Ly). Node (i, j) has linear index j * nx + i, i.e. x runs
/// fastest and rows of constant y are stored contiguously.
///
/// Boundary faces carry homogeneous Neumann conditions; quadrature uses the
/// (tensor-product) trapezoid rule, whose weights are precomputed.
class Grid {
 public:
  Grid(int dim, std::array<double, 2> extents, std::array<int, 2> counts);

  static std::shared_ptr<const Grid> line(double length, int count);
  static std::shared_ptr<const Grid> rectangle(double lx, double ly, int nx, int ny);

  int dim() const { return dim_; }
  double extent(int axis) const { return extents_[axis]; }
  int count(int axis) const { return counts_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double min_spacing() const;
  std::size_t size() const { return static_cast<std::size_t>(counts_[0]) * counts_[1]; }
  double volume() const { return volume_; }

  std::span<const double> weights() const { return weights_; }
  double coordinate(int axis, int index) const { return index * spacing_[axis]; }
  /// Physical position of a node; the y entry is 0 in 1D.
  std::array<double, 2> position(std::size_t node) const;

  bool operator==(const Grid& other) const {
    return dim_ == other.dim_ && extents_ == other.extents_ && counts_ == other.counts_;
  }

 private:
  int dim_;
  std::array<double, 2> extents_;
  std::array<int, 2> counts_;
  std::array<double, 2> spacing_;
  double volume_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Nodal values of a scalar function on a grid. Immutable after construction;
/// every value is finite.
class Field {
 public:
  Field(GridPtr grid, std::vector<double> values);

  static Field constant(GridPtr grid, double value);
  static Field from_function(GridPtr grid, const std::function<double(double, double)>& fn);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  double min() const;
  double max() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
/// Nodewise product.
Field multiply(const Field& a, const Field& b);

/// Throws StructuralError unless both fields live on the same grid.
void require_same_grid(const Field& a, const Field& b);

// Span kernels shared by the Field operations and the time stepper. They
// assume sizes already match the grid.
namespace kernels {
void laplacian(const Grid& grid, std::span<const double> f, std::span<double> out);
void chemotaxis(const Grid& grid, std::span<const double> u, std::span<const double> v,
                double chi, std::span<double> out);
double integrate(const Grid& grid, std::span<const double> f);
}  // namespace kernels

/// Second-order Laplacian with reflected ghosts, f(-h) = f(h).
Field laplacian_neumann(const Field& f);

/// -chi div(u grad v) in conservative face-flux form. Face flux is the
/// arithmetic mean of u times the one-sided difference of v; boundary faces
/// carry no flux and boundary nodes own half cells.
Field chemotaxis_divergence(const Field& u, const Field& v, double chi);

/// Trapezoid rule (tensor product in 2D); exact for fields affine per axis.
double integrate(const Field& f);

struct Norms {
  double l2;
  double linf;
};
Norms norms(const Field& f);

struct Parts {
  Field positive;
  Field negative;
};
/// f+ = max(0, f), f- = max(0, -f).
Parts pos_neg_parts(const Field& f);

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }
inline double negative_part(double x) { return x < 0.0 ? -x : 0.0; }

}  // namespace chemostab

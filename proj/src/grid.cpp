#include "chemostab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chemostab {

namespace {

struct Line {
  std::size_t start;
  std::size_t stride;
  int n;
  double h;
};

// Visits every grid line parallel to `axis`.
template <typename Fn>
void for_each_line(const Grid& grid, int axis, Fn&& fn) {
  const int nx = grid.count(0);
  const int ny = grid.count(1);
  if (axis == 0) {
    for (int j = 0; j < ny; ++j) {
      fn(Line{static_cast<std::size_t>(j) * nx, 1, nx, grid.spacing(0)});
    }
  } else {
    for (int i = 0; i < nx; ++i) {
      fn(Line{static_cast<std::size_t>(i), static_cast<std::size_t>(nx), ny, grid.spacing(1)});
    }
  }
}

void check_finite(std::span<const double> values) {
  for (double x : values) {
    if (!std::isfinite(x)) throw NonFiniteError("field contains a non-finite value");
  }
}

}  // namespace

Grid::Grid(int dim, std::array<double, 2> extents, std::array<int, 2> counts)
    : dim_(dim), extents_(extents), counts_(counts) {
  if (dim != 1 && dim != 2) throw StructuralError("grid dimension must be 1 or 2");
  if (dim == 1) {
    extents_[1] = 1.0;
    counts_[1] = 1;
  }
  for (int k = 0; k < dim; ++k) {
    if (counts_[k] < 3) {
      throw StructuralError("grid axis " + std::to_string(k) + " needs at least 3 nodes");
    }
    if (!(extents_[k] > 0.0) || !std::isfinite(extents_[k])) {
      throw StructuralError("grid axis " + std::to_string(k) + " needs a positive extent");
    }
  }
  spacing_ = {extents_[0] / (counts_[0] - 1), dim == 2 ? extents_[1] / (counts_[1] - 1) : 1.0};
  volume_ = dim == 2 ? extents_[0] * extents_[1] : extents_[0];

  auto axis_weights = [&](int axis) {
    std::vector<double> w(counts_[axis], spacing_[axis]);
    if (counts_[axis] > 1) {
      w.front() *= 0.5;
      w.back() *= 0.5;
    } else {
      w[0] = 1.0;
    }
    return w;
  };
  const auto wx = axis_weights(0);
  const auto wy = dim == 2 ? axis_weights(1) : std::vector<double>{1.0};
  weights_.resize(size());
  for (int j = 0; j < counts_[1]; ++j) {
    for (int i = 0; i < counts_[0]; ++i) {
      weights_[static_cast<std::size_t>(j) * counts_[0] + i] = wx[i] * wy[j];
    }
  }
}

std::shared_ptr<const Grid> Grid::line(double length, int count) {
  return std::make_shared<const Grid>(1, std::array<double, 2>{length, 1.0},
                                      std::array<int, 2>{count, 1});
}

std::shared_ptr<const Grid> Grid::rectangle(double lx, double ly, int nx, int ny) {
  return std::make_shared<const Grid>(2, std::array<double, 2>{lx, ly},
                                      std::array<int, 2>{nx, ny});
}

double Grid::min_spacing() const {
  return dim_ == 2 ? std::min(spacing_[0], spacing_[1]) : spacing_[0];
}

std::array<double, 2> Grid::position(std::size_t node) const {
  const auto i = static_cast<int>(node % counts_[0]);
  const auto j = static_cast<int>(node / counts_[0]);
  return {coordinate(0, i), dim_ == 2 ? coordinate(1, j) : 0.0};
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw StructuralError("field needs a grid");
  if (values_.size() != grid_->size()) {
    throw StructuralError("field has " + std::to_string(values_.size()) +
                          " values but the grid has " + std::to_string(grid_->size()) +
                          " nodes");
  }
  check_finite(values_);
}

Field Field::constant(GridPtr grid, double value) {
  const auto n = grid->size();
  return Field(std::move(grid), std::vector<double>(n, value));
}

Field Field::from_function(GridPtr grid, const std::function<double(double, double)>& fn) {
  std::vector<double> values(grid->size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto p = grid->position(k);
    values[k] = fn(p[0], p[1]);
  }
  return Field(std::move(grid), std::move(values));
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid_ptr() != b.grid_ptr() && !(a.grid() == b.grid())) {
    throw StructuralError("fields live on different grids");
  }
}

namespace {
template <typename Op>
Field zip(const Field& a, const Field& b, Op op) {
  require_same_grid(a, b);
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = op(a[k], b[k]);
  return Field(a.grid_ptr(), std::move(out));
}
}  // namespace

Field operator+(const Field& a, const Field& b) { return zip(a, b, std::plus<>{}); }
Field operator-(const Field& a, const Field& b) { return zip(a, b, std::minus<>{}); }
Field multiply(const Field& a, const Field& b) { return zip(a, b, std::multiplies<>{}); }

Field operator*(double s, const Field& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& x : out) x *= s;
  return Field(a.grid_ptr(), std::move(out));
}

namespace kernels {

void laplacian(const Grid& grid, std::span<const double> f, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    for_each_line(grid, axis, [&](const Line& line) {
      const double inv_h2 = 1.0 / (line.h * line.h);
      auto at = [&](int i) { return line.start + static_cast<std::size_t>(i) * line.stride; };
      const int last = line.n - 1;
      out[at(0)] += 2.0 * (f[at(1)] - f[at(0)]) * inv_h2;
      for (int i = 1; i < last; ++i) {
        out[at(i)] += (f[at(i - 1)] - 2.0 * f[at(i)] + f[at(i + 1)]) * inv_h2;
      }
      out[at(last)] += 2.0 * (f[at(last - 1)] - f[at(last)]) * inv_h2;
    });
  }
}

void chemotaxis(const Grid& grid, std::span<const double> u, std::span<const double> v,
                double chi, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (chi == 0.0) return;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    for_each_line(grid, axis, [&](const Line& line) {
      auto at = [&](int i) { return line.start + static_cast<std::size_t>(i) * line.stride; };
      const double inv_h = 1.0 / line.h;
      const int last = line.n - 1;
      // flux through the face between node i and i+1
      auto flux = [&](int i) {
        return 0.5 * (u[at(i)] + u[at(i + 1)]) * (v[at(i + 1)] - v[at(i)]) * inv_h;
      };
      double left = 0.0;
      for (int i = 0; i < last; ++i) {
        const double right = flux(i);
        const double width = (i == 0) ? 0.5 * line.h : line.h;
        out[at(i)] -= chi * (right - left) / width;
        left = right;
      }
      out[at(last)] -= chi * (0.0 - left) / (0.5 * line.h);
    });
  }
}

double integrate(const Grid& grid, std::span<const double> f) {
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += w[k] * f[k];
  return sum;
}

}  // namespace kernels

Field laplacian_neumann(const Field& f) {
  std::vector<double> out(f.size());
  kernels::laplacian(f.grid(), f.values(), out);
  return Field(f.grid_ptr(), std::move(out));
}

Field chemotaxis_divergence(const Field& u, const Field& v, double chi) {
  require_same_grid(u, v);
  std::vector<double> out(u.size());
  kernels::chemotaxis(u.grid(), u.values(), v.values(), chi, out);
  return Field(u.grid_ptr(), std::move(out));
}

double integrate(const Field& f) { return kernels::integrate(f.grid(), f.values()); }

Norms norms(const Field& f) {
  double sq = 0.0;
  double linf = 0.0;
  const auto w = f.grid().weights();
  for (std::size_t k = 0; k < f.size(); ++k) {
    sq += w[k] * f[k] * f[k];
    linf = std::max(linf, std::abs(f[k]));
  }
  return {std::sqrt(sq), linf};
}

Parts pos_neg_parts(const Field& f) {
  std::vector<double> pos(f.size());
  std::vector<double> neg(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    pos[k] = positive_part(f[k]);
    neg[k] = negative_part(f[k]);
  }
  return {Field(f.grid_ptr(), std::move(pos)), Field(f.grid_ptr(), std::move(neg))};
}

}  // namespace chemostab

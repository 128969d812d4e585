#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chemostab/grid.hpp"

namespace chemostab {

/// Thomas algorithm for a tridiagonal system. `lower[0]` and `upper[n-1]` are
/// ignored. Requires a nonsingular system that needs no pivoting (diagonal
/// dominance is enough). Throws Error on a zero pivot.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<const double> rhs,
                       std::span<double> x);

/// Solves (I - c (Lap - s I)) x = b with the Neumann Laplacian of the grid,
/// c >= 0 and s >= 0. The matrix is an M-matrix for every such pair.
///
/// 1D uses the Thomas algorithm; 2D diagonalises the 1D operator of each axis
/// once (it is similar to a symmetric matrix through the trapezoid weights)
/// and solves exactly in the tensor eigenbasis.
class ShiftedLaplacianSolver {
 public:
  explicit ShiftedLaplacianSolver(GridPtr grid);

  void solve(double c, double s, std::span<const double> b, std::span<double> x) const;

  const Grid& grid() const { return *grid_; }

 private:
  struct AxisBasis {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd to_modes;    // S^{-1}
    Eigen::MatrixXd from_modes;  // S
  };
  static AxisBasis make_basis(int n, double h);

  GridPtr grid_;
  AxisBasis x_basis_;
  AxisBasis y_basis_;
};

}  // namespace chemostab

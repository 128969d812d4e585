#include "chemostab/linear_solver.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace chemostab {

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<const double> rhs,
                       std::span<double> x) {
  const std::size_t n = diag.size();
  std::vector<double> c(n);
  std::vector<double> d(n);
  double beta = diag[0];
  if (beta == 0.0) throw Error("tridiagonal solve: zero pivot at row 0");
  c[0] = n > 1 ? upper[0] / beta : 0.0;
  d[0] = rhs[0] / beta;
  for (std::size_t i = 1; i < n; ++i) {
    beta = diag[i] - lower[i] * c[i - 1];
    if (beta == 0.0) throw Error("tridiagonal solve: zero pivot at row " + std::to_string(i));
    c[i] = i + 1 < n ? upper[i] / beta : 0.0;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
}

ShiftedLaplacianSolver::ShiftedLaplacianSolver(GridPtr grid) : grid_(std::move(grid)) {
  if (grid_->dim() == 2) {
    x_basis_ = make_basis(grid_->count(0), grid_->spacing(0));
    y_basis_ = make_basis(grid_->count(1), grid_->spacing(1));
  }
}

ShiftedLaplacianSolver::AxisBasis ShiftedLaplacianSolver::make_basis(int n, double h) {
  // D = W^{-1} K with K symmetric, so A = W^{1/2} D W^{-1/2} is symmetric.
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
  w[0] = w[n - 1] = 0.5 * h;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const double inv_h2 = 1.0 / (h * h);
  d(0, 0) = -2 * inv_h2;
  d(0, 1) = 2 * inv_h2;
  d(n - 1, n - 1) = -2 * inv_h2;
  d(n - 1, n - 2) = 2 * inv_h2;
  for (int i = 1; i < n - 1; ++i) {
    d(i, i - 1) = inv_h2;
    d(i, i) = -2 * inv_h2;
    d(i, i + 1) = inv_h2;
  }
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd a = sw.asDiagonal() * d * sw.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()));
  if (eig.info() != Eigen::Success) throw Error("eigendecomposition of the Neumann Laplacian failed");
  AxisBasis basis;
  // Exact eigenvalues are <= 0; clip round-off above zero.
  basis.eigenvalues = eig.eigenvalues().cwiseMin(0.0);
  basis.from_modes = sw.cwiseInverse().asDiagonal() * eig.eigenvectors();
  basis.to_modes = eig.eigenvectors().transpose() * sw.asDiagonal();
  return basis;
}

void ShiftedLaplacianSolver::solve(double c, double s, std::span<const double> b,
                                   std::span<double> x) const {
  const Grid& g = *grid_;
  if (g.dim() == 1) {
    const int n = g.count(0);
    const double r = c / (g.spacing(0) * g.spacing(0));
    std::vector<double> lower(n, -r);
    std::vector<double> diag(n, 1.0 + 2.0 * r + c * s);
    std::vector<double> upper(n, -r);
    upper[0] = -2.0 * r;
    lower[n - 1] = -2.0 * r;
    solve_tridiagonal(lower, diag, upper, b, x);
    return;
  }
  const int nx = g.count(0);
  const int ny = g.count(1);
  // Column-major nx-by-ny view: entry (i, j) is node b[j * nx + i].
  Eigen::Map<const Eigen::MatrixXd> bm(b.data(), nx, ny);
  Eigen::MatrixXd modes = x_basis_.to_modes * bm * y_basis_.to_modes.transpose();
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      modes(i, j) /= 1.0 - c * (x_basis_.eigenvalues[i] + y_basis_.eigenvalues[j] - s);
    }
  }
  Eigen::Map<Eigen::MatrixXd> xm(x.data(), nx, ny);
  xm = x_basis_.from_modes * modes * y_basis_.from_modes.transpose();
}

}  // namespace chemostab

#pragma once

#include <span>

#include "chemostab/coefficients.hpp"
#include "chemostab/grid.hpp"

namespace chemostab {

/// Scalar parameters of the chemotaxis system
///   u_t = Lap u - chi div(u grad v) + u (a0 - a1 u - a2 int u)
///   tau v_t = Lap v - lambda v + mu u
/// with homogeneous Neumann conditions.
struct ModelParams {
  double chi = 0.0;
  double tau = 1.0;
  double lambda = 1.0;
  double mu = 1.0;

  /// Throws ValidationError("params.<name>", ...) on the first violated bound.
  void validate() const;
};

struct ModelState {
  double t = 0.0;
  Field u;
  Field v;

  ModelState(double t_, Field u_, Field v_);
  const Grid& grid() const { return u.grid(); }
};

Field rhs_u(const ModelState& state, const CoefficientSet& coeffs, const ModelParams& params);

/// (Lap v - lambda v + mu u) / tau
Field rhs_v(const ModelState& state, const ModelParams& params);

struct MassRate {
  double du;  ///< d/dt int u, reaction part only
  double dv;  ///< tau d/dt int v = -lambda int v + mu int u
};
MassRate mass_rate(const ModelState& state, const CoefficientSet& coeffs, const ModelParams& params);

namespace kernels {
/// Chemotaxis plus logistic reaction for u, written into `out`. `a0`, `a1`,
/// `a2` are nodal coefficient samples at the current time.
void explicit_u(const Grid& grid, std::span<const double> u, std::span<const double> v,
                std::span<const double> a0, std::span<const double> a1,
                std::span<const double> a2, double chi, std::span<double> out);
}  // namespace kernels

}  // namespace chemostab

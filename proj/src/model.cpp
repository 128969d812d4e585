#include "chemostab/model.hpp"

#include <cmath>
#include <vector>

namespace chemostab {

void ModelParams::validate() const {
  if (!std::isfinite(chi)) throw ValidationError("params.chi", "must be finite");
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("params.tau", "must be in (0, 1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("params.lambda", "must be positive");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("params.mu", "must be positive");
}

ModelState::ModelState(double t_, Field u_, Field v_) : t(t_), u(std::move(u_)), v(std::move(v_)) {
  require_same_grid(u, v);
}

namespace kernels {

void explicit_u(const Grid& grid, std::span<const double> u, std::span<const double> v,
                std::span<const double> a0, std::span<const double> a1,
                std::span<const double> a2, double chi, std::span<double> out) {
  chemotaxis(grid, u, v, chi, out);
  const double mass = integrate(grid, u);
  for (std::size_t k = 0; k < u.size(); ++k) {
    out[k] += u[k] * (a0[k] - a1[k] * u[k] - a2[k] * mass);
  }
}

}  // namespace kernels

namespace {
void require_coeff_grid(const ModelState& state, const CoefficientSet& coeffs) {
  if (!(state.grid() == coeffs.grid())) {
    throw StructuralError("state and coefficients live on different grids");
  }
}
}  // namespace

Field rhs_u(const ModelState& state, const CoefficientSet& coeffs, const ModelParams& params) {
  require_coeff_grid(state, coeffs);
  const Grid& grid = state.grid();
  const Field a0 = eval(coeffs.a0, state.t);
  const Field a1 = eval(coeffs.a1, state.t);
  const Field a2 = eval(coeffs.a2, state.t);
  std::vector<double> out(grid.size());
  kernels::explicit_u(grid, state.u.values(), state.v.values(), a0.values(), a1.values(),
                      a2.values(), params.chi, out);
  std::vector<double> lap(grid.size());
  kernels::laplacian(grid, state.u.values(), lap);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += lap[k];
  return Field(state.u.grid_ptr(), std::move(out));
}

Field rhs_v(const ModelState& state, const ModelParams& params) {
  const Grid& grid = state.grid();
  std::vector<double> out(grid.size());
  kernels::laplacian(grid, state.v.values(), out);
  const auto u = state.u.values();
  const auto v = state.v.values();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = (out[k] - params.lambda * v[k] + params.mu * u[k]) / params.tau;
  }
  return Field(state.v.grid_ptr(), std::move(out));
}

MassRate mass_rate(const ModelState& state, const CoefficientSet& coeffs, const ModelParams& params) {
  require_coeff_grid(state, coeffs);
  const Grid& grid = state.grid();
  const Field a0 = eval(coeffs.a0, state.t);
  const Field a1 = eval(coeffs.a1, state.t);
  const Field a2 = eval(coeffs.a2, state.t);
  const auto u = state.u.values();
  const double mass_u = kernels::integrate(grid, u);
  std::vector<double> reaction(grid.size());
  for (std::size_t k = 0; k < reaction.size(); ++k) {
    reaction[k] = u[k] * (a0[k] - a1[k] * u[k] - a2[k] * mass_u);
  }
  return {kernels::integrate(grid, reaction),
          -params.lambda * integrate(state.v) + params.mu * mass_u};
}

}  // namespace chemostab

#include "chemostab/convergence.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace chemostab {

double OrderStudy::observed_order() const {
  if (rows.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return rows.back().order;
}

namespace {

void fill_orders(OrderStudy& study) {
  for (std::size_t k = 0; k < study.rows.size(); ++k) {
    auto& r = study.rows[k];
    r.order = std::numeric_limits<double>::quiet_NaN();
    if (k == 0) continue;
    const auto& p = study.rows[k - 1];
    if (r.error > 0.0 && p.error > 0.0) r.order = std::log(p.error / r.error) / std::log(p.step / r.step);
  }
}

}  // namespace

OrderStudy laplacian_order(int dim, std::span<const int> counts) {
  if (dim != 1 && dim != 2) throw RangeError("dimension must be 1 or 2");
  if (counts.size() < 2) throw RangeError("need at least two refinements");
  OrderStudy study;
  study.name = "laplacian";
  study.design_order = 2;
  const double pi = std::numbers::pi;
  for (int n : counts) {
    auto grid = dim == 1 ? Grid::line(1.0, n) : Grid::rectangle(1.0, 1.0, n, n);
    auto f = Field::from_function(grid, [&](double x, double y) {
      return std::cos(pi * x) * (dim == 2 ? std::cos(pi * y) : 1.0);
    });
    const Field lap = laplacian_neumann(f);
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(lap[i] + dim * pi * pi * f[i]));
    study.rows.push_back({grid->spacing(0), err, 0.0});
  }
  fill_orders(study);
  return study;
}

OrderStudy temporal_order(const CoefficientSet& coeffs, const ModelParams& params,
                          const StepperConfig& base, std::span<const double> dts, double t_end,
                          double u0, double v0) {
  if (dts.size() < 3) throw RangeError("Richardson estimate needs three step sizes");
  if (!coeffs.all_constant()) throw ValidationError("coefficients", "flat reduction needs constant coefficients");
  OrderStudy study;
  study.name = "temporal";
  study.design_order = base.order();
  const GridPtr grid = coeffs.grid_ptr();
  std::vector<double> finals;
  for (double dt : dts) {
    StepperConfig cfg = base;
    cfg.adaptive = false;
    cfg.dt_init = dt;
    cfg.dt_max = dt;
    const auto traj = run(ModelState(0.0, Field::constant(grid, u0), Field::constant(grid, v0)), t_end,
                          coeffs, params, cfg);
    finals.push_back(traj.final_state().u[0] + traj.final_state().v[0]);
  }
  for (std::size_t k = 1; k < dts.size(); ++k) {
    study.rows.push_back({dts[k], std::abs(finals[k] - finals[k - 1]), 0.0});
  }
  fill_orders(study);
  return study;
}

}  // namespace chemostab

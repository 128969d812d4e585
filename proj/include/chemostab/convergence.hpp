#pragma once

#include <span>
#include <string>
#include <vector>

#include "chemostab/stepper.hpp"

namespace chemostab {

struct RefinementRow {
  double step;   ///< h or dt
  double error;
  double order;  ///< NaN on the first row
};

struct OrderStudy {
  std::string name;
  int design_order = 0;
  std::vector<RefinementRow> rows;
  /// Order between the two finest levels.
  double observed_order() const;
};

/// Max-norm error of the Neumann Laplacian on cos(pi x) (times cos(pi y) in
/// 2D) over the unit interval or square, for each node count per axis.
OrderStudy laplacian_order(int dim, std::span<const int> counts);

/// Fixed-step runs of the spatially flat problem, where the system reduces to
/// u' = u (a0 - a1 u - a2 u), tau v' = mu u - lambda v. Successive differences
/// of u + v at t_end give the Richardson order estimate; the error column
/// holds those differences. Coefficients must be constant.
OrderStudy temporal_order(const CoefficientSet& coeffs, const ModelParams& params,
                          const StepperConfig& base, std::span<const double> dts, double t_end,
                          double u0 = 0.1, double v0 = 0.0);

}  // namespace chemostab

#pragma once

// Reference solutions computed independently of the library.

#include <array>
#include <cmath>
#include <numbers>

namespace oracles {

/// u' = u (1 - u)
inline double logistic(double u0, double t) { return u0 / (u0 + (1.0 - u0) * std::exp(-t)); }

/// Flat reduction with a0(t) = 1 + amp sin t, a1 = 1, a2 = 0, lambda = mu = tau = 1:
///   u' = u (1 + amp sin t - u),  v' = u - v.
/// The periodic orbit is the fixed point of the period map, integrated with
/// classical RK4 on a fine uniform step.
class PeriodicLogistic {
 public:
  explicit PeriodicLogistic(double amp, int steps_per_period = 20000) : amp_(amp), n_(steps_per_period) {
    std::array<double, 2> y{1.0, 1.0};
    for (int k = 0; k < 60; ++k) y = advance(y, 0.0, period());
    start_ = y;
  }

  static double period() { return 2.0 * std::numbers::pi; }

  /// State on the periodic orbit at time t.
  std::array<double, 2> at(double t) const {
    const double phase = t - period() * std::floor(t / period());
    return advance(start_, 0.0, phase);
  }

  /// Minimum of u over one period, sampled on the integration grid.
  double min_u() const {
    std::array<double, 2> y = start_;
    double lo = y[0];
    const double h = period() / n_;
    for (int k = 0; k < n_; ++k) {
      y = rk4(y, k * h, h);
      lo = std::min(lo, y[0]);
    }
    return lo;
  }

 private:
  std::array<double, 2> rhs(const std::array<double, 2>& y, double t) const {
    return {y[0] * (1.0 + amp_ * std::sin(t) - y[0]), y[0] - y[1]};
  }

  std::array<double, 2> rk4(const std::array<double, 2>& y, double t, double h) const {
    auto axpy = [](const std::array<double, 2>& a, double s, const std::array<double, 2>& b) {
      return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]};
    };
    const auto k1 = rhs(y, t);
    const auto k2 = rhs(axpy(y, h / 2, k1), t + h / 2);
    const auto k3 = rhs(axpy(y, h / 2, k2), t + h / 2);
    const auto k4 = rhs(axpy(y, h, k3), t + h);
    return {y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
  }

  std::array<double, 2> advance(std::array<double, 2> y, double t0, double length) const {
    if (length <= 0.0) return y;
    const int steps = std::max(1, static_cast<int>(std::ceil(length / period() * n_)));
    const double h = length / steps;
    for (int k = 0; k < steps; ++k) y = rk4(y, t0 + k * h, h);
    return y;
  }

  double amp_;
  int n_;
  std::array<double, 2> start_{};
};

}  // namespace oracles

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chemostab/grid.hpp"

namespace chemostab {

/// Closed time interval [start, end].
struct Window {
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
};

struct Envelope {
  double inf;
  double sup;
};

/// Scalar time factor g(t) of a separable coefficient g(t) h(x).
class TimeFactor {
 public:
  enum class Kind { constant, sinusoid, exp_decay };

  static TimeFactor constant(double value);
  /// offset + amplitude * sin(frequency * t + phase)
  static TimeFactor sinusoid(double offset, double amplitude, double frequency, double phase);
  /// limit + (start - limit) * exp(-rate * t)
  static TimeFactor exp_decay(double start, double limit, double rate);

  double operator()(double t) const;
  Kind kind() const { return kind_; }
  const std::array<double, 4>& params() const { return p_; }
  std::optional<double> period() const;
  /// Times in [w.start, w.end] where g may attain an interior extremum.
  std::vector<double> critical_times(const Window& w) const;

 private:
  TimeFactor(Kind kind, std::array<double, 4> p) : kind_(kind), p_(p) {}
  Kind kind_;
  std::array<double, 4> p_;
};

/// Named spatial profiles, shared by coefficients and initial data. Sine and
/// cosine arguments are pi * mode * x / L so that cosine modes satisfy the
/// Neumann condition.
struct SpatialProfile {
  struct Constant {
    double value = 1.0;
  };
  struct LinearRamp {
    double start = 0.0;
    double end = 1.0;
    int axis = 0;
  };
  /// offset + amplitude * sin(pi * mode * x_axis / L_axis + phase)
  struct Sine {
    double offset = 0.0;
    double amplitude = 1.0;
    double mode = 1.0;
    double phase = 0.0;
    int axis = 0;
  };
  /// offset + amplitude * prod_k cos(pi * modes[k] * x_k / L_k)
  struct Cosine {
    double offset = 0.0;
    double amplitude = 1.0;
    std::array<double, 2> modes{1.0, 0.0};
  };
  /// base + height * exp(-|x - center|^2 / (2 width^2))
  struct GaussianBump {
    double base = 0.0;
    double height = 1.0;
    std::array<double, 2> center{0.5, 0.5};
    double width = 0.1;
  };
  using Kind = std::variant<Constant, LinearRamp, Sine, Cosine, GaussianBump>;
  Kind kind = Constant{};

  Field sample(const GridPtr& grid) const;
};

/// One heterogeneous coefficient a_i(t, x) on a fixed grid.
class CoefficientSpec {
 public:
  struct Constant {
    double value = 0.0;
  };
  struct Separable {
    TimeFactor time = TimeFactor::constant(1.0);
    SpatialProfile profile;
  };
  /// Nodal snapshots at strictly increasing knots, linear in time between them.
  struct Tabulated {
    std::vector<double> times;
    std::vector<std::vector<double>> samples;
    bool clamp = false;
    std::string source;
  };
  /// Library-only escape hatch: any evaluator returning nodal samples.
  struct Custom {
    std::function<std::vector<double>(double)> fn;
    std::optional<double> period;
  };
  using Kind = std::variant<Constant, Separable, Tabulated, Custom>;

  CoefficientSpec(GridPtr grid, Kind kind);

  static CoefficientSpec constant(GridPtr grid, double value);

  const Kind& kind() const { return kind_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }

  /// True when a_i does not depend on t or x.
  bool is_constant() const;
  /// True when a_i does not depend on t.
  bool is_autonomous() const;
  std::optional<double> period() const;
  /// Tabulated coefficients are only Lipschitz in time.
  bool only_lipschitz_in_time() const;
  std::vector<double> critical_times(const Window& w) const;

  struct Sample {
    Field field;
    bool clamped;
  };
  /// Evaluates a_i(t, .). Outside a table's range the nearest knot is used
  /// when clamping is enabled; otherwise RangeError.
  Sample sample(double t) const;

 private:
  GridPtr grid_;
  Kind kind_;
  std::vector<double> profile_values_;
};

Field eval(const CoefficientSpec& spec, double t);

/// Spatial infimum and supremum over grid nodes at time t.
Envelope envelope(const CoefficientSpec& spec, double t);

/// Inf/sup over x and t in the window, from n uniformly spaced times plus the
/// kind's critical times (sinusoid peaks, table knots). Exact for every
/// declarative kind; periodic kinds need only one period.
Envelope global_envelope(const CoefficientSpec& spec, const Window& window, int n_samples);

/// Sample times used for time-envelope quantities: n uniform points in the
/// window merged with the critical times of every spec, sorted and unique.
std::vector<double> envelope_sample_times(std::span<const CoefficientSpec* const> specs,
                                          const Window& window, int n_samples);

/// The triple (a0, a1, a2) on one grid.
struct CoefficientSet {
  CoefficientSpec a0;
  CoefficientSpec a1;
  CoefficientSpec a2;

  CoefficientSet(CoefficientSpec a0_, CoefficientSpec a1_, CoefficientSpec a2_);

  static CoefficientSet constant(GridPtr grid, double a0, double a1, double a2);

  const GridPtr& grid_ptr() const { return a0.grid_ptr(); }
  const Grid& grid() const { return a0.grid(); }
  bool all_constant() const;
  bool all_autonomous() const;
  /// Common period when every non-autonomous member is periodic with
  /// commensurate period (the largest one is used when they coincide up to
  /// integer multiples).
  std::optional<double> period() const;
  bool any_only_lipschitz() const;

  /// Requires a1_inf > 0 over the window; with `positive_growth`, also
  /// a0_inf > 0. Throws ValidationError naming the coefficient.
  void validate(const Window& window, int n_samples, bool positive_growth) const;
};

}  // namespace chemostab

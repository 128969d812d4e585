#include "chemostab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chemostab {

TimeFactor TimeFactor::constant(double value) { return {Kind::constant, {value, 0, 0, 0}}; }

TimeFactor TimeFactor::sinusoid(double offset, double amplitude, double frequency, double phase) {
  return {Kind::sinusoid, {offset, amplitude, frequency, phase}};
}

TimeFactor TimeFactor::exp_decay(double start, double limit, double rate) {
  if (!(rate >= 0.0)) throw RangeError("exp-decay rate must be nonnegative");
  return {Kind::exp_decay, {start, limit, rate, 0}};
}

double TimeFactor::operator()(double t) const {
  switch (kind_) {
    case Kind::constant:
      return p_[0];
    case Kind::sinusoid:
      return p_[0] + p_[1] * std::sin(p_[2] * t + p_[3]);
    case Kind::exp_decay:
      return p_[1] + (p_[0] - p_[1]) * std::exp(-p_[2] * t);
  }
  return 0.0;
}

std::optional<double> TimeFactor::period() const {
  if (kind_ == Kind::sinusoid && p_[2] != 0.0 && p_[1] != 0.0) {
    return 2.0 * std::numbers::pi / std::abs(p_[2]);
  }
  return std::nullopt;
}

std::vector<double> TimeFactor::critical_times(const Window& w) const {
  std::vector<double> out;
  if (kind_ != Kind::sinusoid || p_[2] == 0.0) return out;
  // frequency * t + phase = pi/2 + k pi
  const double omega = p_[2];
  const double pi = std::numbers::pi;
  const double a = (omega * w.start + p_[3] - pi / 2) / pi;
  const double b = (omega * w.end + p_[3] - pi / 2) / pi;
  const auto k0 = static_cast<long>(std::ceil(std::min(a, b)));
  const auto k1 = static_cast<long>(std::floor(std::max(a, b)));
  for (long k = k0; k <= k1; ++k) {
    const double t = (pi / 2 + k * pi - p_[3]) / omega;
    if (t >= w.start && t <= w.end) out.push_back(t);
  }
  return out;
}

Field SpatialProfile::sample(const GridPtr& grid) const {
  const double pi = std::numbers::pi;
  const Grid& g = *grid;
  auto coord = [&](int axis, double x, double y) { return axis == 0 ? x : y; };
  auto check_axis = [&](int axis) {
    if (axis < 0 || axis >= g.dim()) throw StructuralError("profile axis out of range");
  };
  return std::visit(
      [&](const auto& p) -> Field {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return Field::constant(grid, p.value);
        } else if constexpr (std::is_same_v<T, LinearRamp>) {
          check_axis(p.axis);
          const double len = g.extent(p.axis);
          return Field::from_function(grid, [&](double x, double y) {
            return p.start + (p.end - p.start) * coord(p.axis, x, y) / len;
          });
        } else if constexpr (std::is_same_v<T, Sine>) {
          check_axis(p.axis);
          const double len = g.extent(p.axis);
          return Field::from_function(grid, [&](double x, double y) {
            return p.offset + p.amplitude * std::sin(pi * p.mode * coord(p.axis, x, y) / len + p.phase);
          });
        } else if constexpr (std::is_same_v<T, Cosine>) {
          return Field::from_function(grid, [&](double x, double y) {
            double c = std::cos(pi * p.modes[0] * x / g.extent(0));
            if (g.dim() == 2) c *= std::cos(pi * p.modes[1] * y / g.extent(1));
            return p.offset + p.amplitude * c;
          });
        } else {
          if (!(p.width > 0.0)) throw RangeError("gaussian-bump width must be positive");
          return Field::from_function(grid, [&](double x, double y) {
            double r2 = (x - p.center[0]) * (x - p.center[0]);
            if (g.dim() == 2) r2 += (y - p.center[1]) * (y - p.center[1]);
            return p.base + p.height * std::exp(-r2 / (2 * p.width * p.width));
          });
        }
      },
      kind);
}

CoefficientSpec::CoefficientSpec(GridPtr grid, Kind kind) : grid_(std::move(grid)), kind_(std::move(kind)) {
  if (!grid_) throw StructuralError("coefficient needs a grid");
  if (auto* s = std::get_if<Separable>(&kind_)) {
    const Field h = s->profile.sample(grid_);
    profile_values_.assign(h.values().begin(), h.values().end());
  } else if (auto* tab = std::get_if<Tabulated>(&kind_)) {
    if (tab->times.empty() || tab->times.size() != tab->samples.size()) {
      throw StructuralError("table needs one sample row per time knot");
    }
    for (std::size_t k = 0; k < tab->times.size(); ++k) {
      if (tab->samples[k].size() != grid_->size()) {
        throw StructuralError("table row " + std::to_string(k) + " has " +
                              std::to_string(tab->samples[k].size()) + " values, grid has " +
                              std::to_string(grid_->size()));
      }
      if (k > 0 && !(tab->times[k] > tab->times[k - 1])) {
        throw RangeError("table time knots must be strictly increasing");
      }
      for (double x : tab->samples[k]) {
        if (!std::isfinite(x)) throw NonFiniteError("table contains a non-finite value");
      }
    }
  } else if (auto* c = std::get_if<Custom>(&kind_)) {
    if (!c->fn) throw StructuralError("custom coefficient needs an evaluator");
  }
}

CoefficientSpec CoefficientSpec::constant(GridPtr grid, double value) {
  return CoefficientSpec(std::move(grid), Constant{value});
}

bool CoefficientSpec::is_constant() const {
  if (std::holds_alternative<Constant>(kind_)) return true;
  if (auto* s = std::get_if<Separable>(&kind_)) {
    return s->time.kind() == TimeFactor::Kind::constant &&
           std::holds_alternative<SpatialProfile::Constant>(s->profile.kind);
  }
  return false;
}

bool CoefficientSpec::is_autonomous() const {
  if (std::holds_alternative<Constant>(kind_)) return true;
  if (auto* s = std::get_if<Separable>(&kind_)) {
    const auto& p = s->time.params();
    switch (s->time.kind()) {
      case TimeFactor::Kind::constant:
        return true;
      case TimeFactor::Kind::sinusoid:
        return p[1] == 0.0 || p[2] == 0.0;
      case TimeFactor::Kind::exp_decay:
        return p[0] == p[1] || p[2] == 0.0;
    }
  }
  if (auto* tab = std::get_if<Tabulated>(&kind_)) return tab->times.size() == 1;
  return false;
}

std::optional<double> CoefficientSpec::period() const {
  if (auto* s = std::get_if<Separable>(&kind_)) return s->time.period();
  if (auto* c = std::get_if<Custom>(&kind_)) return c->period;
  return std::nullopt;
}

bool CoefficientSpec::only_lipschitz_in_time() const {
  return std::holds_alternative<Tabulated>(kind_) && !is_autonomous();
}

std::vector<double> CoefficientSpec::critical_times(const Window& w) const {
  if (auto* s = std::get_if<Separable>(&kind_)) return s->time.critical_times(w);
  std::vector<double> out;
  if (auto* tab = std::get_if<Tabulated>(&kind_)) {
    for (double t : tab->times) {
      if (t >= w.start && t <= w.end) out.push_back(t);
    }
  }
  return out;
}

CoefficientSpec::Sample CoefficientSpec::sample(double t) const {
  return std::visit(
      [&](const auto& k) -> Sample {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return {Field::constant(grid_, k.value), false};
        } else if constexpr (std::is_same_v<T, Separable>) {
          const double g = k.time(t);
          std::vector<double> out(profile_values_);
          for (double& x : out) x *= g;
          return {Field(grid_, std::move(out)), false};
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          const auto& ts = k.times;
          const bool outside = t < ts.front() || t > ts.back();
          if (outside && !k.clamp) {
            throw RangeError("t = " + std::to_string(t) + " outside the table range [" +
                             std::to_string(ts.front()) + ", " + std::to_string(ts.back()) + "]");
          }
          if (t <= ts.front()) return {Field(grid_, k.samples.front()), outside};
          if (t >= ts.back()) return {Field(grid_, k.samples.back()), outside};
          const auto hi = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
          const std::size_t lo = hi - 1;
          const double s = (t - ts[lo]) / (ts[hi] - ts[lo]);
          std::vector<double> out(grid_->size());
          for (std::size_t n = 0; n < out.size(); ++n) {
            out[n] = (1.0 - s) * k.samples[lo][n] + s * k.samples[hi][n];
          }
          return {Field(grid_, std::move(out)), false};
        } else {
          return {Field(grid_, k.fn(t)), false};
        }
      },
      kind_);
}

Field eval(const CoefficientSpec& spec, double t) { return spec.sample(t).field; }

Envelope envelope(const CoefficientSpec& spec, double t) {
  if (auto* c = std::get_if<CoefficientSpec::Constant>(&spec.kind())) return {c->value, c->value};
  const Field f = eval(spec, t);
  return {f.min(), f.max()};
}

std::vector<double> envelope_sample_times(std::span<const CoefficientSpec* const> specs,
                                          const Window& window, int n_samples) {
  if (!(window.end > window.start)) throw RangeError("empty time window");
  if (n_samples < 2) throw RangeError("need at least 2 samples");
  std::vector<double> times;
  times.reserve(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    times.push_back(k == n_samples - 1 ? window.end
                                       : window.start + window.length() * k / (n_samples - 1));
  }
  for (const CoefficientSpec* spec : specs) {
    const auto crit = spec->critical_times(window);
    times.insert(times.end(), crit.begin(), crit.end());
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

Envelope global_envelope(const CoefficientSpec& spec, const Window& window, int n_samples) {
  const CoefficientSpec* specs[] = {&spec};
  const auto times = envelope_sample_times(specs, window, n_samples);
  Envelope out = envelope(spec, times.front());
  if (spec.is_autonomous()) return out;
  for (double t : times) {
    const Envelope e = envelope(spec, t);
    out.inf = std::min(out.inf, e.inf);
    out.sup = std::max(out.sup, e.sup);
  }
  return out;
}

CoefficientSet::CoefficientSet(CoefficientSpec a0_, CoefficientSpec a1_, CoefficientSpec a2_)
    : a0(std::move(a0_)), a1(std::move(a1_)), a2(std::move(a2_)) {
  if (!(a0.grid() == a1.grid()) || !(a0.grid() == a2.grid())) {
    throw StructuralError("coefficients a0, a1, a2 must share one grid");
  }
}

CoefficientSet CoefficientSet::constant(GridPtr grid, double c0, double c1, double c2) {
  return {CoefficientSpec::constant(grid, c0), CoefficientSpec::constant(grid, c1),
          CoefficientSpec::constant(grid, c2)};
}

bool CoefficientSet::all_constant() const {
  return a0.is_constant() && a1.is_constant() && a2.is_constant();
}

bool CoefficientSet::all_autonomous() const {
  return a0.is_autonomous() && a1.is_autonomous() && a2.is_autonomous();
}

std::optional<double> CoefficientSet::period() const {
  double longest = 0.0;
  std::vector<double> periods;
  for (const CoefficientSpec* s : {&a0, &a1, &a2}) {
    if (s->is_autonomous()) continue;
    auto p = s->period();
    if (!p) return std::nullopt;
    periods.push_back(*p);
    longest = std::max(longest, *p);
  }
  if (periods.empty()) return std::nullopt;
  for (double p : periods) {
    const double ratio = longest / p;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) return std::nullopt;
  }
  return longest;
}

bool CoefficientSet::any_only_lipschitz() const {
  return a0.only_lipschitz_in_time() || a1.only_lipschitz_in_time() || a2.only_lipschitz_in_time();
}

void CoefficientSet::validate(const Window& window, int n_samples, bool positive_growth) const {
  if (!(global_envelope(a1, window, n_samples).inf > 0.0)) {
    throw ValidationError("coefficients.a1", "a1 must be positive everywhere (a1_inf > 0)");
  }
  if (positive_growth && !(global_envelope(a0, window, n_samples).inf > 0.0)) {
    throw ValidationError("coefficients.a0", "a0 must be positive everywhere (a0_inf > 0)");
  }
}

}  // namespace chemostab

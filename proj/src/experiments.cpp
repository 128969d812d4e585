#include "chemostab/experiments.hpp"

#include "chemostab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

namespace chemostab {

GapSeries trajectory_gap(const Trajectory& a, const Trajectory& b) {
  if (a.samples.size() != b.samples.size()) {
    throw StructuralError("trajectories have different sample counts");
  }
  GapSeries out;
  out.samples.reserve(a.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    const ModelState& sa = a.samples[k];
    const ModelState& sb = b.samples[k];
    if (std::abs(sa.t - sb.t) > 1e-12 * std::max(1.0, std::abs(sa.t))) {
      throw StructuralError("sample times differ at index " + std::to_string(k));
    }
    const Norms w = norms(sa.u - sb.u);
    const Norms phi = norms(sa.v - sb.v);
    out.samples.push_back(
        {sa.t, w.l2 * w.l2 + phi.l2 * phi.l2, w.l2, phi.l2, w.linf, phi.linf});
  }
  return out;
}

DecayFit fit_decay_rate(const GapSeries& series, const Window& window, double floor) {
  std::vector<double> ts;
  std::vector<double> logs;
  bool floored = false;
  for (const auto& s : series.samples) {
    if (s.t < window.start || s.t > window.end) continue;
    ts.push_back(s.t);
    if (!(s.E > floor)) {
      floored = true;
      logs.push_back(0.0);
    } else {
      logs.push_back(std::log(s.E));
    }
  }
  if (ts.size() < 3) throw RangeError("decay fit needs at least 3 samples in the window");
  if (floored) {
    return {-std::numeric_limits<double>::infinity(), 0.0, true, ts.size()};
  }
  const double n = static_cast<double>(ts.size());
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    my += logs[k];
  }
  mt /= n;
  my /= n;
  double stt = 0.0;
  double sty = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - mt) * (ts[k] - mt);
    sty += (ts[k] - mt) * (logs[k] - my);
    syy += (logs[k] - my) * (logs[k] - my);
  }
  const double rate = sty / stt;
  const double r2 = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
  return {rate, r2, false, ts.size()};
}

PersistenceEstimate estimate_persistence(const Trajectory& traj, double burn_in) {
  if (traj.samples.empty()) throw RangeError("empty trajectory");
  const double t0 = traj.samples.front().t;
  double eta = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& s : traj.samples) {
    if (s.t < t0 + burn_in) continue;
    eta = std::min(eta, s.u.min());
    any = true;
  }
  if (!any) throw RangeError("trajectory does not extend beyond the burn-in");
  // earliest sample from which u never again drops below eta
  double xi = traj.samples.back().t;
  for (std::size_t k = traj.samples.size(); k-- > 0;) {
    if (traj.samples[k].u.min() < eta) break;
    xi = traj.samples[k].t;
  }
  return {eta, xi - t0, burn_in, eta > 0.0};
}

double w2inf_norm(const Field& v) {
  const Grid& g = v.grid();
  const int nx = g.count(0);
  const int ny = g.count(1);
  auto at = [&](int i, int j) {
    // reflected ghosts
    if (i < 0) i = -i;
    if (i >= nx) i = 2 * (nx - 1) - i;
    if (j < 0) j = -j;
    if (j >= ny) j = 2 * (ny - 1) - j;
    return v[static_cast<std::size_t>(j) * nx + i];
  };
  const double hx = g.spacing(0);
  const double hy = g.spacing(1);
  double out = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double c = at(i, j);
      const double gx = (at(i + 1, j) - at(i - 1, j)) / (2 * hx);
      const double dxx = (at(i + 1, j) - 2 * c + at(i - 1, j)) / (hx * hx);
      out = std::max({out, std::abs(c), std::abs(dxx)});
      double grad2 = gx * gx;
      if (g.dim() == 2) {
        const double gy = (at(i, j + 1) - at(i, j - 1)) / (2 * hy);
        const double dyy = (at(i, j + 1) - 2 * c + at(i, j - 1)) / (hy * hy);
        const double dxy =
            (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) /
            (4 * hx * hy);
        grad2 += gy * gy;
        out = std::max({out, std::abs(dyy), std::abs(dxy)});
      }
      out = std::max(out, std::sqrt(grad2));
    }
  }
  return out;
}

BoundsEstimate estimate_bounds(const Trajectory& traj, const BurnIns& burn_ins) {
  if (traj.samples.empty()) throw RangeError("empty trajectory");
  const double t0 = traj.samples.front().t;
  constexpr double none = -std::numeric_limits<double>::infinity();
  BoundsEstimate out{none, none, none};
  for (const auto& s : traj.samples) {
    if (s.t >= t0 + burn_ins.t1) out.M1_hat = std::max(out.M1_hat, integrate(s.u));
    if (s.t >= t0 + burn_ins.t2) out.M2_hat = std::max(out.M2_hat, s.u.max());
    if (s.t >= t0 + burn_ins.t_star) out.C3_hat = std::max(out.C3_hat, w2inf_norm(s.v));
  }
  if (out.M1_hat == none || out.M2_hat == none || out.C3_hat == none) {
    throw RangeError("trajectory does not extend beyond the burn-in times");
  }
  return out;
}

std::vector<BoundsRow> bounds_series(const Trajectory& traj) {
  std::vector<BoundsRow> rows;
  rows.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    rows.push_back({s.t, integrate(s.u), s.u.max(), w2inf_norm(s.v)});
  }
  return rows;
}

PersistenceEstimate pool(const std::vector<PersistenceEstimate>& estimates) {
  if (estimates.empty()) throw RangeError("nothing to pool");
  PersistenceEstimate out = estimates.front();
  for (const auto& e : estimates) {
    out.eta_hat = std::min(out.eta_hat, e.eta_hat);
    out.xi_hat = std::max(out.xi_hat, e.xi_hat);
    out.burn_in = std::max(out.burn_in, e.burn_in);
  }
  out.persistent = out.eta_hat > 0.0;
  return out;
}

BoundsEstimate pool(const std::vector<BoundsEstimate>& estimates) {
  if (estimates.empty()) throw RangeError("nothing to pool");
  BoundsEstimate out = estimates.front();
  for (const auto& e : estimates) {
    out.M1_hat = std::max(out.M1_hat, e.M1_hat);
    out.M2_hat = std::max(out.M2_hat, e.M2_hat);
    out.C3_hat = std::max(out.C3_hat, e.C3_hat);
  }
  return out;
}

KnownConstants measured_constants(const PersistenceEstimate& persistence,
                                  const BoundsEstimate& bounds) {
  KnownConstants c;
  c.M1 = KnownConstant{bounds.M1_hat, Provenance::measured};
  c.M2 = KnownConstant{bounds.M2_hat, Provenance::measured};
  c.eta = KnownConstant{persistence.eta_hat, Provenance::measured};
  c.C3_tilde = KnownConstant{bounds.C3_hat, Provenance::measured};
  return c;
}

std::vector<Trajectory> run_seeds(const std::vector<InitialData>& seeds, double t0, double t_end,
                                  const CoefficientSet& coeffs, const ModelParams& params,
                                  const StepperConfig& cfg, const RunOptions& options,
                                  int threads) {
  const ImexStepper stepper(coeffs, params, cfg);
  std::vector<std::optional<Trajectory>> results(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t k) {
    results[k] = stepper.run(ModelState(t0, seeds[k].u, seeds[k].v), t_end, options);
  });
  std::vector<Trajectory> out;
  out.reserve(seeds.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

TBackInsufficient::TBackInsufficient(double gap, double tolerance)
    : Error("t_back insufficient: seed gap " + std::to_string(gap) + " exceeds tolerance " +
            std::to_string(tolerance)),
      gap_(gap) {}

EntireSolution approximate_entire_solution(const CoefficientSet& coeffs, const ModelParams& params,
                                           const StepperConfig& cfg, double t_back,
                                           const Window& t_span,
                                           const EntireSolutionOptions& options) {
  if (!(t_back > 0.0)) throw RangeError("t_back must be positive");
  if (!(t_span.end >= t_span.start)) throw RangeError("empty kept span");
  const double t_start = t_span.start - t_back;

  // Transient up to the kept span, then the sampled segment.
  const std::vector<InitialData> seeds{options.seed_a, options.seed_b};
  const auto lead = run_seeds(seeds, t_start, t_span.start, coeffs, params, cfg, {}, options.threads);
  std::vector<InitialData> entry;
  for (const auto& traj : lead) entry.push_back({traj.final_state().u, traj.final_state().v});
  RunOptions sampled;
  sampled.sample_interval = options.sample_interval;
  auto kept = run_seeds(entry, t_span.start, t_span.end, coeffs, params, cfg, sampled,
                        options.threads);

  double gap = 0.0;
  for (const auto& s : trajectory_gap(kept[0], kept[1]).samples) {
    gap = std::max({gap, s.w_Linf, s.phi_Linf});
  }
  if (gap > options.tolerance) throw TBackInsufficient(gap, options.tolerance);
  return {std::move(kept[0]), std::move(kept[1]), gap};
}

std::vector<StartTimeGap> start_time_gaps(const CoefficientSet& coeffs, const ModelParams& params,
                                          const StepperConfig& cfg, const InitialData& seed,
                                          const ModelState& reference, double elapsed,
                                          int n_starts, int threads) {
  if (!(elapsed >= 0.0)) throw RangeError("elapsed time must be nonnegative");
  if (n_starts < 1) throw RangeError("need at least one start time");
  if (coeffs.all_autonomous()) n_starts = 1;
  const double spacing = coeffs.period() ? *coeffs.period() / n_starts : 1.0;

  std::vector<StartTimeGap> out;
  for (int k = 0; k < n_starts; ++k) {
    out.push_back({reference.t - elapsed - k * spacing, 0.0});
  }
  const ImexStepper stepper(coeffs, params, cfg);
  parallel_for(out.size(), threads, [&](std::size_t k) {
    auto traj = stepper.run(ModelState(out[k].t0, seed.u, seed.v), reference.t);
    out[k].gap = norms(traj.final_state().u - reference.u).linf;
  });
  return out;
}

GronwallResult gronwall_check_series(const GapSeries& series,
                                     const std::function<double(double)>& rate_bound,
                                     double from, double noise_floor) {
  GronwallResult result;
  result.band_entry = from;
  const auto& s = series.samples;
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (s[k].t >= from) idx.push_back(k);
  }
  auto slope = [&](std::size_t k) { return 0.5 * (s[k + 1].E - s[k].E) / (s[k + 1].t - s[k].t); };

  result.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k : idx) {
    const bool exact_zero = s[k].E == 0.0 && s[k + 1].E == 0.0;
    if (!exact_zero && (s[k].E < noise_floor || s[k + 1].E < noise_floor)) {
      ++result.below_floor;
      continue;
    }
    const double dt = s[k + 1].t - s[k].t;
    const double lhs = slope(k);
    double lipschitz = 0.0;
    if (k > 0) lipschitz = std::max(lipschitz, std::abs(lhs - slope(k - 1)) / dt);
    if (k + 2 < s.size()) lipschitz = std::max(lipschitz, std::abs(slope(k + 1) - lhs) / dt);
    const double slack = 2.0 * dt * lipschitz;
    const double rhs = std::max(rate_bound(s[k].t) * s[k].E, rate_bound(s[k + 1].t) * s[k + 1].E);
    const double margin = rhs - lhs;
    ++result.intervals;
    if (margin >= -slack) ++result.satisfied;
    result.max_slack = std::max(result.max_slack, slack);
    if (margin < result.worst_margin) {
      result.worst_margin = margin;
      result.slack_at_worst = slack;
    }
  }
  if (result.intervals == 0) {
    result.worst_margin = 0.0;
    result.status = Status::inconclusive;
    result.diagnostics = "no interval above the noise floor after band entry";
    return result;
  }
  result.fraction = static_cast<double>(result.satisfied) / static_cast<double>(result.intervals);
  result.status = result.satisfied == result.intervals ? Status::holds : Status::fails;
  return result;
}

GronwallResult gronwall_check(const Trajectory& a, const Trajectory& b,
                              const CoefficientSet& coeffs, const ModelParams& params,
                              const StabilityReport& report, double eps) {
  const KnownConstants& c = report.constants;
  GronwallResult inconclusive;
  if (!c.eta || !c.M2 || !c.C3_tilde) {
    inconclusive.diagnostics = "eta, M2 and C3_tilde are required";
    return inconclusive;
  }
  if (eps <= 0.0) eps = report.eps.value_or(c.eta->value / 10.0);
  inconclusive.eps = eps;

  const GapSeries series = trajectory_gap(a, b);
  const double lo = c.eta->value - eps;
  const double hi = c.M2->value + eps;
  auto in_band = [&](std::size_t k) {
    for (const Trajectory* tr : {&a, &b}) {
      const Field& u = tr->samples[k].u;
      if (u.min() < lo || u.max() > hi) return false;
    }
    return true;
  };
  std::size_t entry = a.samples.size();
  for (std::size_t k = a.samples.size(); k-- > 0;) {
    if (!in_band(k)) break;
    entry = k;
  }
  if (entry + 1 >= a.samples.size()) {
    inconclusive.diagnostics = "the pair never settles in the band [eta - eps, M2 + eps]";
    return inconclusive;
  }

  double scale = 0.0;
  for (const Trajectory* tr : {&a, &b}) {
    for (const auto& s : tr->samples) {
      scale = std::max({scale, std::abs(s.u.max()), std::abs(s.v.max())});
    }
  }
  const double resolution = 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, scale);
  const double noise_floor = coeffs.grid().volume() * resolution * resolution;

  auto bound = [&](double t) {
    return decay_integrand(t, coeffs, params, c) + perturbation_K(t, eps, coeffs);
  };
  GronwallResult result = gronwall_check_series(series, bound, a.samples[entry].t, noise_floor);
  result.eps = eps;
  return result;
}

}  // namespace chemostab

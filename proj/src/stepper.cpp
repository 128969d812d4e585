#include "chemostab/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chemostab {

void StepperConfig::validate() const {
  if (!(dt_init > 0.0)) throw ValidationError("stepper.dt_init", "must be positive");
  if (!(dt_min > 0.0)) throw ValidationError("stepper.dt_min", "must be positive");
  if (!(dt_min <= dt_init && dt_init <= dt_max)) {
    throw ValidationError("stepper.dt_init", "must satisfy dt_min <= dt_init <= dt_max");
  }
  if (!(safety > 0.0 && safety < 1.0)) throw ValidationError("stepper.safety", "must be in (0, 1)");
  if (!(positivity_floor >= 0.0)) {
    throw ValidationError("stepper.positivity_floor", "must be nonnegative");
  }
  if (!(theta >= 0.5 && theta <= 1.0)) throw ValidationError("stepper.theta", "must be in [0.5, 1]");
  if (!(error_tol > 0.0)) throw ValidationError("stepper.error_tol", "must be positive");
  if (!(clamp_budget >= 0.0)) throw ValidationError("stepper.clamp_budget", "must be nonnegative");
}

int StepperConfig::order() const { return std::abs(theta - 0.5) < 1e-12 ? 2 : 1; }

StepSizeUnderflow::StepSizeUnderflow(ModelState state, double dt, const std::string& why)
    : Error("step size underflow at t = " + std::to_string(state.t) + " (dt = " +
            std::to_string(dt) + "): " + why),
      state_(std::move(state)),
      dt_(dt) {}

std::vector<double> Trajectory::times() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.t);
  return out;
}

ImexStepper::ImexStepper(const CoefficientSet& coeffs, const ModelParams& params,
                         const StepperConfig& cfg)
    : coeffs_(coeffs), params_(params), cfg_(cfg), solver_(coeffs.grid_ptr()) {
  params_.validate();
  cfg_.validate();
}

void ImexStepper::explicit_u(double t, std::span<const double> u, std::span<const double> v,
                             std::vector<double>& out) const {
  const Field a0 = eval(coeffs_.a0, t);
  const Field a1 = eval(coeffs_.a1, t);
  const Field a2 = eval(coeffs_.a2, t);
  out.resize(u.size());
  kernels::explicit_u(coeffs_.grid(), u, v, a0.values(), a1.values(), a2.values(), params_.chi, out);
}

bool ImexStepper::raw_step(double t, std::span<const double> u, std::span<const double> v,
                           double dt, std::vector<double>& u_out,
                           std::vector<double>& v_out) const {
  const Grid& grid = coeffs_.grid();
  const std::size_t n = grid.size();
  const double theta = cfg_.theta;
  const double tau = params_.tau;
  const double lambda = params_.lambda;
  const double mu = params_.mu;

  std::vector<double> lap_u(n);
  std::vector<double> lap_v(n);
  kernels::laplacian(grid, u, lap_u);
  kernels::laplacian(grid, v, lap_v);

  std::vector<double> f0;
  explicit_u(t, u, v, f0);

  std::vector<double> base_u(n);
  std::vector<double> base_v(n);
  for (std::size_t k = 0; k < n; ++k) {
    base_u[k] = u[k] + (1.0 - theta) * dt * lap_u[k];
    base_v[k] = v[k] + (1.0 - theta) * dt * (lap_v[k] - lambda * v[k]) / tau;
  }

  std::vector<double> rhs_u(n);
  std::vector<double> rhs_v(n);
  for (std::size_t k = 0; k < n; ++k) {
    rhs_u[k] = base_u[k] + dt * f0[k];
    rhs_v[k] = base_v[k] + dt * mu * u[k] / tau;
  }
  u_out.resize(n);
  v_out.resize(n);
  solver_.solve(theta * dt, 0.0, rhs_u, u_out);
  solver_.solve(theta * dt / tau, lambda, rhs_v, v_out);

  if (theta < 1.0) {
    // Heun corrector: explicit terms averaged over both ends of the step.
    std::vector<double> f1;
    explicit_u(t + dt, u_out, v_out, f1);
    for (std::size_t k = 0; k < n; ++k) {
      rhs_u[k] = base_u[k] + 0.5 * dt * (f0[k] + f1[k]);
      rhs_v[k] = base_v[k] + 0.5 * dt * mu * (u[k] + u_out[k]) / tau;
    }
    solver_.solve(theta * dt, 0.0, rhs_u, u_out);
    solver_.solve(theta * dt / tau, lambda, rhs_v, v_out);
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(u_out[k]) || !std::isfinite(v_out[k])) return false;
  }
  return true;
}

StepResult ImexStepper::step(const ModelState& state, double dt) const {
  if (!(dt > 0.0)) throw RangeError("step size must be positive");
  if (!(state.grid() == coeffs_.grid())) {
    throw StructuralError("state and coefficients live on different grids");
  }
  StepResult result;
  std::vector<double> u;
  std::vector<double> v;
  if (!raw_step(state.t, state.u.values(), state.v.values(), dt, u, v)) {
    result.rejection = "non-finite value";
    return result;
  }

  double scale = std::max({std::abs(state.u.min()), std::abs(state.u.max()),
                           std::abs(state.v.min()), std::abs(state.v.max())});
  if (scale == 0.0) scale = 1.0;
  const double tolerance = 1e-12 * scale;
  const auto weights = state.grid().weights();
  for (auto* field : {&u, &v}) {
    for (std::size_t k = 0; k < field->size(); ++k) {
      double& x = (*field)[k];
      if (x < -tolerance) {
        result.rejection = "negative value " + std::to_string(x);
        result.clamped_nodes = 0;
        result.clamped_mass = 0.0;
        return result;
      }
      if (x < 0.0) {
        result.clamped_mass += weights[k] * (cfg_.positivity_floor - x);
        ++result.clamped_nodes;
        x = cfg_.positivity_floor;
      }
    }
  }
  const auto& grid = state.u.grid_ptr();
  result.state.emplace(state.t + dt, Field(grid, std::move(u)), Field(grid, std::move(v)));
  return result;
}

double ImexStepper::stability_limit(const ModelState& state) const {
  const Grid& grid = state.grid();
  const Field a0 = eval(coeffs_.a0, state.t);
  const Field a1 = eval(coeffs_.a1, state.t);
  const Field a2 = eval(coeffs_.a2, state.t);
  const auto u = state.u.values();
  const auto v = state.v.values();
  const double mass = kernels::integrate(grid, u);
  const double chi = std::abs(params_.chi);

  std::vector<double> lap_v(grid.size());
  if (chi > 0.0) kernels::laplacian(grid, v, lap_v);

  double rate = 0.0;
  double a2_max = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    rate = std::max(rate, std::abs(a0[k]) + 2.0 * std::abs(a1[k]) * u[k] +
                              std::abs(a2[k]) * std::abs(mass) + chi * std::abs(lap_v[k]));
    a2_max = std::max(a2_max, std::abs(a2[k]));
  }
  rate += a2_max * state.u.max() * grid.volume();

  double limit = std::numeric_limits<double>::infinity();
  if (rate > 0.0) limit = 1.0 / rate;
  if (chi > 0.0) {
    const int nx = grid.count(0);
    for (std::size_t k = 0; k < v.size(); ++k) {
      const auto i = static_cast<int>(k % nx);
      const auto j = static_cast<int>(k / nx);
      if (i + 1 < nx) {
        const double speed = chi * std::abs(v[k + 1] - v[k]) / grid.spacing(0);
        if (speed > 0.0) limit = std::min(limit, grid.spacing(0) / speed);
      }
      if (grid.dim() == 2 && j + 1 < grid.count(1)) {
        const double speed = chi * std::abs(v[k + nx] - v[k]) / grid.spacing(1);
        if (speed > 0.0) limit = std::min(limit, grid.spacing(1) / speed);
      }
    }
  }
  return cfg_.safety * limit;
}

namespace {

// Error estimates below this are indistinguishable from rounding.
constexpr double roundoff_floor = 100.0 * std::numeric_limits<double>::epsilon();

double step_error(const ModelState& coarse, const ModelState& fine) {
  double err = 0.0;
  for (auto [a, b] : {std::pair{&coarse.u, &fine.u}, std::pair{&coarse.v, &fine.v}}) {
    for (std::size_t k = 0; k < a->size(); ++k) {
      err = std::max(err, std::abs((*a)[k] - (*b)[k]) / (1.0 + std::abs((*b)[k])));
    }
  }
  return err;
}

std::vector<double> sample_schedule(double t0, double t_end, double interval) {
  std::vector<double> times;
  if (interval > 0.0) {
    for (long k = 1;; ++k) {
      const double t = t0 + k * interval;
      if (t >= t_end - 1e-9 * interval) break;
      times.push_back(t);
    }
  }
  if (t_end > t0) times.push_back(t_end);
  return times;
}

}  // namespace

Trajectory ImexStepper::run(const ModelState& state0, double t_end, const RunOptions& options) const {
  if (!(t_end >= state0.t)) throw RangeError("t_end must not precede the initial time");
  if (options.sample_interval < 0.0) throw RangeError("sample interval must be nonnegative");

  Trajectory traj;
  for (const auto& obs : options.observers) traj.diagnostic_names.push_back(obs.name);
  traj.diagnostics.resize(options.observers.size());

  auto record = [&](const ModelState& s) {
    for (std::size_t i = 0; i < options.observers.size(); ++i) {
      const auto& obs = options.observers[i];
      try {
        traj.diagnostics[i].push_back(obs.fn(s));
      } catch (const std::exception& e) {
        throw RunAborted("observer '" + obs.name + "' failed at t = " + std::to_string(s.t) +
                         ": " + e.what());
      }
    }
    traj.samples.push_back(s);
  };

  ModelState state = state0;
  record(state);
  traj.stats.max_mass = integrate(state.u);

  const auto schedule = sample_schedule(state0.t, t_end, options.sample_interval);
  const int order = cfg_.order();
  double dt = cfg_.dt_init;
  traj.stats.min_dt = std::numeric_limits<double>::infinity();

  for (double target : schedule) {
    while (state.t < target) {
      const double remaining = target - state.t;
      double h = cfg_.adaptive ? std::min({dt, cfg_.dt_max, stability_limit(state)}) : cfg_.dt_init;
      const bool landing = h >= remaining * (1.0 - 1e-10);
      if (landing) {
        h = remaining;
      } else if (cfg_.adaptive && 2.0 * h > remaining) {
        // two equal steps instead of a full one plus a sliver
        h = 0.5 * remaining;
      }

      std::optional<ModelState> accepted;
      std::size_t clamped_nodes = 0;
      double clamped_mass = 0.0;
      double err = 0.0;

      if (cfg_.adaptive) {
        const StepResult coarse = step(state, h);
        const StepResult half = step(state, 0.5 * h);
        StepResult fine;
        if (half.accepted()) fine = step(*half.state, 0.5 * h);
        if (!coarse.accepted() || !fine.accepted()) {
          ++traj.stats.rejected;
          dt = 0.25 * h;
          if (dt < cfg_.dt_min) {
            throw StepSizeUnderflow(state, dt,
                                    coarse.accepted() ? (half.accepted() ? fine.rejection : half.rejection)
                                                      : coarse.rejection);
          }
          continue;
        }
        err = step_error(*coarse.state, *fine.state);
        const double allowed = cfg_.error_tol * h + roundoff_floor;
        if (err > allowed) {
          ++traj.stats.rejected;
          dt = h * std::max(0.2, cfg_.safety * std::pow(allowed / err, 1.0 / order));
          if (dt < cfg_.dt_min) throw StepSizeUnderflow(state, dt, "local error above tolerance");
          continue;
        }
        accepted = fine.state;
        clamped_nodes = half.clamped_nodes + fine.clamped_nodes;
        clamped_mass = half.clamped_mass + fine.clamped_mass;
        const double grow =
            err == 0.0 ? 5.0 : std::min(5.0, cfg_.safety * std::pow(allowed / err, 1.0 / order));
        const double next = h * grow;
        dt = landing ? std::max(dt, next) : next;
        dt = std::min(dt, cfg_.dt_max);
      } else {
        StepResult single = step(state, h);
        if (!single.accepted()) throw StepSizeUnderflow(state, h, single.rejection);
        accepted = std::move(single.state);
        clamped_nodes = single.clamped_nodes;
        clamped_mass = single.clamped_mass;
      }

      if (landing) accepted->t = target;
      state = std::move(*accepted);
      ++traj.stats.accepted;
      traj.stats.clamped_nodes += clamped_nodes;
      traj.stats.clamped_mass += clamped_mass;
      traj.stats.max_mass = std::max(traj.stats.max_mass, integrate(state.u));
      traj.stats.min_dt = std::min(traj.stats.min_dt, h);
      traj.stats.max_dt = std::max(traj.stats.max_dt, h);
    }
    record(state);
  }
  if (traj.stats.accepted == 0) traj.stats.min_dt = 0.0;

  if (traj.stats.clamped_mass > cfg_.clamp_budget * traj.stats.max_mass) {
    throw RunAborted("positivity clamp budget exceeded: clamped mass " +
                     std::to_string(traj.stats.clamped_mass) + " > " +
                     std::to_string(cfg_.clamp_budget) + " * max mass " +
                     std::to_string(traj.stats.max_mass));
  }
  return traj;
}

StepResult step(const ModelState& state, double dt, const CoefficientSet& coeffs,
                const ModelParams& params, const StepperConfig& cfg) {
  return ImexStepper(coeffs, params, cfg).step(state, dt);
}

Trajectory run(const ModelState& state0, double t_end, const CoefficientSet& coeffs,
               const ModelParams& params, const StepperConfig& cfg, const RunOptions& options) {
  return ImexStepper(coeffs, params, cfg).run(state0, t_end, options);
}

}  // namespace chemostab

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chemostab/coefficients.hpp"
#include "chemostab/linear_solver.hpp"
#include "chemostab/model.hpp"

namespace chemostab {

struct StepperConfig {
  double dt_init = 1e-3;
  double dt_min = 1e-12;
  double dt_max = 0.05;
  double safety = 0.9;
  /// Value assigned to nodes clamped out of [-1e-12 * scale, 0).
  double positivity_floor = 0.0;
  /// 0.5 = Crank-Nicolson with a Heun explicit corrector (order 2),
  /// 1 = backward Euler with forward Euler explicit terms (order 1).
  double theta = 0.5;
  /// Local error per unit time allowed by the step-doubling controller.
  double error_tol = 1e-6;
  /// Fixed steps of dt_init when false; used by convergence studies.
  bool adaptive = true;
  /// Cumulative clamped mass allowed, relative to max int u over the run.
  double clamp_budget = 1e-8;

  void validate() const;
  int order() const;
};

struct StepResult {
  std::optional<ModelState> state;  ///< empty when the step was rejected
  std::size_t clamped_nodes = 0;
  double clamped_mass = 0.0;
  std::string rejection;
  bool accepted() const { return state.has_value(); }
};

/// Repeated rejection pushed the step below dt_min. Carries the last
/// accepted state for post-mortem.
class StepSizeUnderflow : public Error {
 public:
  StepSizeUnderflow(ModelState state, double dt, const std::string& why);
  const ModelState& state() const { return state_; }
  double dt() const { return dt_; }

 private:
  ModelState state_;
  double dt_;
};

/// A run stopped for a reason other than step control: an observer threw, or
/// the positivity clamp budget was exceeded.
class RunAborted : public Error {
 public:
  using Error::Error;
};

struct Observer {
  std::string name;
  std::function<double(const ModelState&)> fn;
};

struct RunStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t clamped_nodes = 0;
  double clamped_mass = 0.0;
  double max_mass = 0.0;
  double min_dt = 0.0;
  double max_dt = 0.0;
};

struct Trajectory {
  std::vector<ModelState> samples;
  std::vector<std::string> diagnostic_names;
  /// diagnostics[i][k] is observer i at sample k.
  std::vector<std::vector<double>> diagnostics;
  RunStats stats;

  std::vector<double> times() const;
  const ModelState& final_state() const { return samples.back(); }
};

struct RunOptions {
  /// Samples at t0 + k * interval and at t_end; zero keeps only the endpoints.
  double sample_interval = 0.0;
  std::vector<Observer> observers;
};

/// IMEX integrator: the linear part (Lap u, (Lap v - lambda v) / tau) is
/// treated with the theta scheme, chemotaxis, reaction and the mu u / tau
/// source explicitly. Holds the factorised diffusion operator for one grid.
class ImexStepper {
 public:
  ImexStepper(const CoefficientSet& coeffs, const ModelParams& params, const StepperConfig& cfg);

  /// One step of size dt without error control.
  StepResult step(const ModelState& state, double dt) const;

  /// Largest dt allowed by the explicit terms at this state.
  double stability_limit(const ModelState& state) const;

  Trajectory run(const ModelState& state0, double t_end, const RunOptions& options = {}) const;

  const StepperConfig& config() const { return cfg_; }

 private:
  bool raw_step(double t, std::span<const double> u, std::span<const double> v, double dt,
                std::vector<double>& u_out, std::vector<double>& v_out) const;
  void explicit_u(double t, std::span<const double> u, std::span<const double> v,
                  std::vector<double>& out) const;

  CoefficientSet coeffs_;
  ModelParams params_;
  StepperConfig cfg_;
  ShiftedLaplacianSolver solver_;
};

StepResult step(const ModelState& state, double dt, const CoefficientSet& coeffs,
                const ModelParams& params, const StepperConfig& cfg);

Trajectory run(const ModelState& state0, double t_end, const CoefficientSet& coeffs,
               const ModelParams& params, const StepperConfig& cfg,
               const RunOptions& options = {});

}  // namespace chemostab

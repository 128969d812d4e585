#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chemostab/stability.hpp"
#include "chemostab/stepper.hpp"

namespace chemostab {

/// Difference between two runs at one sample: w = u_a - u_b, phi = v_a - v_b,
/// E = int (w^2 + phi^2).
struct GapSample {
  double t;
  double E;
  double w_L2;
  double phi_L2;
  double w_Linf;
  double phi_Linf;
};

struct GapSeries {
  std::vector<GapSample> samples;
};

/// Requires identical grids and sample times; throws StructuralError otherwise.
GapSeries trajectory_gap(const Trajectory& a, const Trajectory& b);

struct DecayFit {
  double rate;  ///< slope of log E; -inf when the floor was hit
  double r2;
  bool floored;
  std::size_t points;
};

/// Least-squares slope of log E(t) over samples inside the window. If some
/// E <= floor the fit is skipped and the -inf sentinel is returned with
/// `floored` set. Fewer than 3 samples in the window is a RangeError.
DecayFit fit_decay_rate(const GapSeries& series, const Window& window, double floor = 0.0);

struct PersistenceEstimate {
  double eta_hat;  ///< min of u over space and over samples after burn-in
  double xi_hat;   ///< time after t0 from which min u stays >= eta_hat
  double burn_in;
  bool persistent;  ///< eta_hat > 0
};

PersistenceEstimate estimate_persistence(const Trajectory& traj, double burn_in);

/// Burn-in times after the initial time for M1, M2 and C3 respectively.
struct BurnIns {
  double t1 = 0.0;
  double t2 = 0.0;
  double t_star = 0.0;
};

struct BoundsEstimate {
  double M1_hat;  ///< sup int u
  double M2_hat;  ///< sup max u
  double C3_hat;  ///< sup discrete W^{2,inf} norm of v
};

BoundsEstimate estimate_bounds(const Trajectory& traj, const BurnIns& burn_ins);

/// Nodal maximum of |v|, |grad v| and the second differences (including the
/// mixed one in 2D), with reflected ghosts at the boundary.
double w2inf_norm(const Field& v);

struct BoundsRow {
  double t;
  double mass_u;
  double sup_u;
  double w2inf_v;
};
std::vector<BoundsRow> bounds_series(const Trajectory& traj);

/// Pooling over several initial data: the eventual bounds are uniform in the
/// initial data, so the floor is the minimum and the bounds the maximum.
PersistenceEstimate pool(const std::vector<PersistenceEstimate>& estimates);
BoundsEstimate pool(const std::vector<BoundsEstimate>& estimates);

/// Measured eta, M1, M2 and C3_tilde, tagged with Provenance::measured.
KnownConstants measured_constants(const PersistenceEstimate& persistence,
                                  const BoundsEstimate& bounds);

struct InitialData {
  Field u;
  Field v;
};

/// Runs independent simulations from the same time, one per initial datum.
/// Runs execute on up to `threads` worker threads; results keep input order.
std::vector<Trajectory> run_seeds(const std::vector<InitialData>& seeds, double t0, double t_end,
                                  const CoefficientSet& coeffs, const ModelParams& params,
                                  const StepperConfig& cfg, const RunOptions& options,
                                  int threads = 1);

class TBackInsufficient : public Error {
 public:
  TBackInsufficient(double gap, double tolerance);
  double gap() const { return gap_; }

 private:
  double gap_;
};

struct EntireSolutionOptions {
  InitialData seed_a;
  InitialData seed_b;
  /// Largest allowed L-inf distance between the two kept segments.
  double tolerance = 1e-6;
  double sample_interval = 0.1;
  int threads = 2;
};

struct EntireSolution {
  Trajectory segment;  ///< seed_a's run restricted to the kept span
  Trajectory other;    ///< seed_b's run on the same span
  double seed_gap;     ///< max over kept samples of the L-inf gap in u and v
};

/// Pullback approximation: both seeds start at t_span.start - t_back, only
/// samples in t_span are kept, and the seed-independence gap is measured.
/// Throws TBackInsufficient when the gap exceeds the tolerance.
EntireSolution approximate_entire_solution(const CoefficientSet& coeffs, const ModelParams& params,
                                           const StepperConfig& cfg, double t_back,
                                           const Window& t_span,
                                           const EntireSolutionOptions& options);

struct StartTimeGap {
  double t0;
  double gap;  ///< L-inf distance of u from the reference at the reference time
};

/// Finite surrogate for the supremum over initial times: the seed is started
/// at t_ref - elapsed - k * spacing, k = 0..n_starts-1, and each run is
/// compared with `reference` at t_ref. The spacing is period / n_starts for
/// periodic coefficients and one time unit otherwise; autonomous coefficients
/// need a single start.
std::vector<StartTimeGap> start_time_gaps(const CoefficientSet& coeffs, const ModelParams& params,
                                          const StepperConfig& cfg, const InitialData& seed,
                                          const ModelState& reference, double elapsed,
                                          int n_starts = 8, int threads = 1);

struct GronwallResult {
  Status status = Status::inconclusive;
  double band_entry = 0.0;
  std::size_t intervals = 0;      ///< intervals checked
  std::size_t satisfied = 0;
  std::size_t below_floor = 0;    ///< skipped, E under the round-off floor
  double fraction = 0.0;
  double worst_margin = 0.0;      ///< min of rhs - lhs over checked intervals
  double slack_at_worst = 0.0;
  double max_slack = 0.0;
  double eps = 0.0;
  std::string diagnostics;
};

/// Checks (E_{k+1} - E_k) / (2 dt) <= max_end((h + K) E) + slack on each
/// interval starting at or after `from`. The slack is 2 dt times a local
/// Lipschitz estimate of the slope of E / 2 taken from neighbouring intervals.
/// Intervals with E below `noise_floor` at either end are skipped, unless E
/// vanishes exactly at both ends (0 <= 0 is checked as is).
GronwallResult gronwall_check_series(const GapSeries& series,
                                     const std::function<double(double)>& rate_bound,
                                     double from, double noise_floor);

/// Energy inequality along a pair of computed solutions, after both enter the
/// band [eta - eps, M2 + eps]. eps <= 0 selects the report's default.
GronwallResult gronwall_check(const Trajectory& a, const Trajectory& b,
                              const CoefficientSet& coeffs, const ModelParams& params,
                              const StabilityReport& report, double eps = 0.0);

}  // namespace chemostab

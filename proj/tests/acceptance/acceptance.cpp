// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chemostab/commands.hpp"
#include "chemostab/convergence.hpp"
#include "oracles.hpp"

using namespace chemostab;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Shared homogeneous benchmark: three seeds on (0, 1) to T = 60.
struct Benchmark {
  GridPtr grid = Grid::line(1.0, 101);
  CoefficientSet coeffs = CoefficientSet::constant(grid, 1.0, 1.0, 0.0);
  ModelParams params{0.05, 1.0, 1.0, 1.0};
  StepperConfig cfg = [] {
    StepperConfig c;
    c.error_tol = 1e-7;
    c.dt_max = 0.1;
    return c;
  }();
  std::vector<InitialData> seeds;
  std::vector<Trajectory> runs;
  double seconds = 0.0;

  Benchmark() {
    const Field v0 = Field::constant(grid, 0.0);
    seeds.push_back({Field::constant(grid, 0.1), v0});
    seeds.push_back({Field::constant(grid, 5.0), v0});
    seeds.push_back({Field::from_function(grid, [](double x, double) { return 1.0 + 0.5 * std::cos(std::numbers::pi * x); }), v0});
    RunOptions options;
    options.sample_interval = 0.25;
    const auto start = std::chrono::steady_clock::now();
    runs = run_seeds(seeds, 0.0, 60.0, coeffs, params, cfg, options, 3);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  PersistenceEstimate persistence() const {
    std::vector<PersistenceEstimate> p;
    for (const auto& r : runs) p.push_back(estimate_persistence(r, 10.0));
    return pool(p);
  }
  BoundsEstimate bounds() const {
    std::vector<BoundsEstimate> b;
    for (const auto& r : runs) b.push_back(estimate_bounds(r, {10.0, 10.0, 10.0}));
    return pool(b);
  }
  StabilityReport report() const {
    return estimate_theta(coeffs, params, measured_constants(persistence(), bounds()), {0.0, 60.0}, 1000);
  }
};

const Benchmark& benchmark() {
  static const Benchmark b;
  return b;
}

Outcome criterion1() {
  const auto& b = benchmark();
  double gap = 0.0;
  for (std::size_t i = 0; i < b.runs.size(); ++i) {
    for (std::size_t j = i + 1; j < b.runs.size(); ++j) {
      const auto& last = trajectory_gap(b.runs[i], b.runs[j]).samples.back();
      gap = std::max({gap, last.w_Linf, last.phi_Linf});
    }
  }
  double dist = 0.0;
  for (const auto& r : b.runs) {
    const auto& s = r.final_state();
    for (std::size_t k = 0; k < s.u.size(); ++k) dist = std::max({dist, std::abs(s.u[k] - 1.0), std::abs(s.v[k] - 1.0)});
  }
  const bool pass = gap < 1e-3 && dist < 2e-3 && b.seconds < 30.0;
  return {pass, "max pairwise gap " + num(gap) + ", max |(u,v)-(1,1)| " + num(dist) + ", runtime " +
                    num(b.seconds) + " s"};
}

Outcome criterion2() {
  const auto& b = benchmark();
  const StabilityReport report = b.report();
  if (!report.theta || !report.eps) return {false, "theta not computed"};
  const double theta = *report.theta;
  const double eps = *report.eps;
  bool pass = theta < 0.0;
  std::string detail = "theta " + num(theta) + ", eps " + num(eps);
  for (std::size_t i = 0; i < b.runs.size(); ++i) {
    for (std::size_t j = i + 1; j < b.runs.size(); ++j) {
      const DecayFit fit = fit_decay_rate(trajectory_gap(b.runs[i], b.runs[j]), {10.0, 40.0});
      pass = pass && !fit.floored && fit.rate <= theta + eps + 0.05 && fit.r2 >= 0.95;
      detail += "; pair " + std::to_string(i) + "-" + std::to_string(j) + " rate " + num(fit.rate) + " r2 " +
                num(fit.r2);
    }
  }
  return {pass, detail};
}

Outcome criterion3() {
  const auto grid = Grid::line(1.0, 11);
  const auto coeffs = CoefficientSet::constant(grid, 1.0, 1.0, 0.0);
  const ConvexConstants c = compute_M2_convex(coeffs, ModelParams{1.0, 1.0, 1.0, 1.0}, 1);
  const bool pass = std::abs(c.M0 - 1.5) <= 1e-12 && std::abs(c.M0ai - 3.0) <= 1e-12 && std::abs(c.M2 - 3.0) <= 1e-12;
  return {pass, "M0 " + num(c.M0) + ", M0ai " + num(c.M0ai) + ", M2 " + num(c.M2)};
}

Outcome criterion4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const double length = 0.2 + 3.0 * U(rng);
    const auto grid = Grid::line(length, 5);
    const double a0 = 0.1 + 3.0 * U(rng);
    const double a1 = 0.1 + 3.0 * U(rng);
    const double a2 = -1.0 + 2.0 * U(rng);
    const ModelParams p{-2.0 + 4.0 * U(rng), 0.05 + 0.95 * U(rng), 0.1 + 3.0 * U(rng), 0.1 + 3.0 * U(rng)};
    KnownConstants k;
    const double eta = 0.05 + U(rng);
    const double M2 = eta + 3.0 * U(rng);
    const double C3 = 5.0 * U(rng);
    k.eta = KnownConstant{eta, Provenance::config};
    k.M2 = KnownConstant{M2, Provenance::config};
    k.C3_tilde = KnownConstant{C3, Provenance::config};
    const auto coeffs = CoefficientSet::constant(grid, a0, a1, a2);
    const double computed = compute_L2(0.0, coeffs, p, k) - compute_L1(0.0, coeffs, k);

    const double pos = std::max(a2, 0.0);
    const double neg = std::max(-a2, 0.0);
    const double terms[] = {a0, p.mu * p.mu / (2.0 * p.lambda * p.tau), std::abs(p.chi) * C3 / 2.0,
                            length * M2 * (pos + 2.0 * neg), -eta * (2.0 * a1 + length * (std::abs(a2) + pos))};
    double closed = 0.0;
    double scale = 0.0;
    for (double t : terms) {
      closed += t;
      scale += std::abs(t);
    }
    worst = std::max(worst, std::abs(computed - closed) / scale);
  }
  return {worst <= 1e-12, "max relative deviation " + num(worst) + " over 1000 draws"};
}

Outcome criterion5() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const bool two_d = trial % 2 == 1;
    const int n = 5 + static_cast<int>(20 * U(rng));
    const auto grid = two_d ? Grid::rectangle(0.5 + U(rng), 0.5 + U(rng), n, n + 3) : Grid::line(0.5 + 2.0 * U(rng), n);
    std::vector<double> u(grid->size()), v(grid->size());
    for (auto& x : u) x = 3.0 * U(rng);
    for (auto& x : v) x = 3.0 * U(rng);
    auto profile = [&] {
      SpatialProfile p;
      p.kind = SpatialProfile::Sine{U(rng), U(rng), 1.0 + 3.0 * U(rng), U(rng), two_d ? 1 : 0};
      return p;
    };
    const CoefficientSet coeffs(
        CoefficientSpec(grid, CoefficientSpec::Separable{TimeFactor::sinusoid(1.0, 0.3, 1.0, 0.0), profile()}),
        CoefficientSpec(grid, CoefficientSpec::Separable{TimeFactor::constant(1.0 + U(rng)), profile()}),
        CoefficientSpec(grid, CoefficientSpec::Separable{TimeFactor::constant(U(rng) - 0.5), profile()}));
    const ModelParams params{-5.0 + 10.0 * U(rng), 1.0, 1.0, 1.0};
    const ModelState state(3.0 * U(rng), Field(grid, u), Field(grid, v));
    const Field rhs = rhs_u(state, coeffs, params);
    const double du = mass_rate(state, coeffs, params).du;
    const Field flux = chemotaxis_divergence(state.u, state.v, params.chi);
    double scale = 1.0;
    for (std::size_t k = 0; k < rhs.size(); ++k) {
      scale = std::max({scale, std::abs(rhs[k]), std::abs(flux[k])});
    }
    worst = std::max(worst, std::abs(integrate(rhs) - du) / (scale * grid->volume()));
  }
  return {worst <= 1e-12, "max scaled mismatch " + num(worst) + " over 50 cases"};
}

Outcome criterion6() {
  const std::vector<int> counts{21, 41, 81, 161};
  const OrderStudy spatial = laplacian_order(1, counts);
  bool pass = true;
  std::string detail = "spatial orders";
  for (std::size_t k = 1; k < spatial.rows.size(); ++k) {
    pass = pass && spatial.rows[k].order >= 1.9 && spatial.rows[k].order <= 2.1;
    detail += " " + num(spatial.rows[k].order);
  }
  const auto grid = Grid::line(1.0, 5);
  const auto coeffs = CoefficientSet::constant(grid, 1.0, 1.0, 0.0);
  const std::vector<double> dts{0.04, 0.02, 0.01, 0.005};
  for (double theta : {0.5, 1.0}) {
    StepperConfig cfg;
    cfg.theta = theta;
    const OrderStudy temporal = temporal_order(coeffs, ModelParams{}, cfg, dts, 2.0);
    const double order = temporal.observed_order();
    pass = pass && std::abs(order - temporal.design_order) <= 0.15;
    detail += "; theta=" + num(theta) + " temporal order " + num(order) + " (design " +
              std::to_string(temporal.design_order) + ")";
  }
  return {pass, detail};
}

Outcome criterion7() {
  const auto& b = benchmark();
  const PersistenceEstimate p = b.persistence();
  const BoundsEstimate m = b.bounds();
  EntireSolutionOptions options{b.seeds[0], b.seeds[1], 1e-6, 0.1, 2};
  const EntireSolution entire = approximate_entire_solution(b.coeffs, b.params, b.cfg, 40.0, {0.0, 5.0}, options);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : entire.segment.samples) {
    lo = std::min(lo, s.u.min());
    hi = std::max(hi, s.u.max());
  }
  const bool pass = p.eta_hat >= 0.95 && p.eta_hat <= 1.0 && m.M2_hat >= 1.0 && m.M2_hat <= 1.3 &&
                    m.M1_hat <= m.M2_hat * b.grid->volume() && lo >= p.eta_hat && hi <= m.M2_hat;
  return {pass, "eta_hat " + num(p.eta_hat) + ", M2_hat " + num(m.M2_hat) + ", M1_hat " + num(m.M1_hat) +
                    ", entire u in [" + num(lo) + ", " + num(hi) + "]"};
}

Outcome criterion8() {
  const auto grid = Grid::line(1.0, 41);
  const CoefficientSet coeffs(
      CoefficientSpec(grid, CoefficientSpec::Separable{TimeFactor::sinusoid(1.0, 0.2, 1.0, 0.0), SpatialProfile{}}),
      CoefficientSpec::constant(grid, 1.0), CoefficientSpec::constant(grid, 0.0));
  const ModelParams params{0.0, 1.0, 1.0, 1.0};
  StepperConfig cfg;
  cfg.error_tol = 1e-8;
  cfg.dt_max = 0.05;
  EntireSolutionOptions options{{Field::constant(grid, 0.2), Field::constant(grid, 0.0)},
                                {Field::constant(grid, 3.0), Field::constant(grid, 2.0)}, 1e-5, 0.05, 2};
  const double period = 2.0 * std::numbers::pi;
  const EntireSolution entire = approximate_entire_solution(coeffs, params, cfg, 40.0, {0.0, period}, options);
  const oracles::PeriodicLogistic oracle(0.2);
  double err = 0.0;
  for (const auto& s : entire.segment.samples) {
    const auto [u, v] = oracle.at(s.t);
    for (std::size_t k = 0; k < s.u.size(); ++k) err = std::max({err, std::abs(s.u[k] - u), std::abs(s.v[k] - v)});
  }
  const bool pass = entire.seed_gap < 1e-5 && err < 1e-3;
  return {pass, "seed gap " + num(entire.seed_gap) + ", oracle error " + num(err)};
}

Outcome criterion9() {
  const auto& b = benchmark();
  const StabilityReport report = b.report();
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < b.runs.size(); ++i) {
    for (std::size_t j = i + 1; j < b.runs.size(); ++j) {
      const GronwallResult g = gronwall_check(b.runs[i], b.runs[j], b.coeffs, b.params, report);
      pass = pass && g.status == Status::holds && g.fraction == 1.0 && g.worst_margin >= -g.slack_at_worst;
      detail += "pair " + std::to_string(i) + "-" + std::to_string(j) + " fraction " + num(g.fraction) + " (" +
                std::to_string(g.intervals) + " intervals); ";
    }
  }
  GapSeries synthetic;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    synthetic.samples.push_back({t, std::exp(t), 0.0, 0.0, 0.0, 0.0});
  }
  const double theta = *report.theta;
  const GronwallResult g = gronwall_check_series(synthetic, [&](double) { return theta; }, 0.0, 0.0);
  const double detection = 1.0 - g.fraction;
  pass = pass && g.intervals == 100 && detection == 1.0;
  detail += "synthetic detection " + num(100.0 * detection) + "%";
  return {pass, detail};
}

Outcome criterion10() {
  RunConfig config = parse_config(R"({
    "constants": {"M2": 3, "eta": 0.9, "C3_tilde": 1},
    "sweep": {"axes": [{"key": "params.chi", "start": 0, "stop": 0.6, "count": 61}]},
    "output": {"name": "h3-threshold"}
  })");
  CommandOptions options;
  options.out_dir = std::filesystem::temp_directory_path() / "chemostab-acceptance";
  options.threads = 4;
  std::ostringstream out, err;
  if (run_command("sweep", config, options, out, err) != 0) return {false, "sweep failed: " + err.str()};
  const double step = 0.01;
  const double threshold = 1.0 / 3.0;
  std::istringstream lines(out.str());
  std::string line;
  std::vector<std::pair<double, bool>> points;
  while (std::getline(lines, line)) {
    if (line.rfind("params.chi=", 0) != 0) continue;
    const double chi = std::stod(line.substr(11));
    points.push_back({chi, line.find("h3_ok=true") != std::string::npos});
  }
  double first_fail = std::numeric_limits<double>::quiet_NaN();
  bool monotone = true;
  for (const auto& [chi, ok] : points) {
    if (!ok && std::isnan(first_fail)) first_fail = chi;
    if (ok && !std::isnan(first_fail)) monotone = false;
  }
  const bool pass = points.size() == 61 && monotone && std::abs(first_fail - threshold) <= step;
  return {pass, "h3_ok flips at chi " + num(first_fail) + " (chi*M2 = " + num(3.0 * first_fail) + "), grid step " +
                    num(step)};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                        criterion6, criterion7, criterion8, criterion9, criterion10};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %zu: %s - %s\n", k + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}

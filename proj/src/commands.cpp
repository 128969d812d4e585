#include "chemostab/commands.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "chemostab/convergence.hpp"
#include "chemostab/csv.hpp"
#include "chemostab/parallel.hpp"

namespace chemostab {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string opt_cell(const std::optional<double>& x) { return x ? format_double(*x) : "NA"; }

// Every file of one command shares the directory, name and config hash.
class Outputs {
 public:
  Outputs(const RunConfig& config, const CommandOptions& options, std::string command)
      : dir_(options.out_dir.value_or(config.output.dir)),
        name_(config.output.name),
        hash_(config_hash(config)),
        command_(std::move(command)) {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream open(const std::string& kind) {
    const auto path = dir_ / (name_ + "-" + kind + "-" + hash_ + ".csv");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write '" + path.string() + "'");
    CsvWriter csv(os);
    csv.meta("config_hash", hash_);
    csv.meta("command", command_);
    csv.meta("kind", kind);
    written_.push_back(path);
    return os;
  }

  void list(std::ostream& out) const {
    for (const auto& p : written_) out << "wrote " << p.string() << "\n";
  }

 private:
  std::filesystem::path dir_;
  std::string name_;
  std::string hash_;
  std::string command_;
  std::vector<std::filesystem::path> written_;
};

double sample_interval(const RunConfig& config) {
  if (config.time.sample_interval > 0.0) return config.time.sample_interval;
  return std::max((config.time.t_end - config.time.t0) / 400.0, 1e-3);
}

BurnIns burn_ins(const ExperimentConfig& ex) {
  if (ex.bound_burn_ins) return {(*ex.bound_burn_ins)[0], (*ex.bound_burn_ins)[1], (*ex.bound_burn_ins)[2]};
  return {ex.burn_in, ex.burn_in, ex.burn_in};
}

void require_run_beyond_burn_in(const RunConfig& config) {
  const BurnIns b = burn_ins(config.experiment);
  const double longest = std::max({config.experiment.burn_in, b.t1, b.t2, b.t_star});
  if (!(config.time.t_end - config.time.t0 > longest)) {
    throw ValidationError("time.t_end", "run must extend beyond the burn-in times");
  }
}

KnownConstants base_constants(const RunConfig& config, const CoefficientSet& coeffs,
                              const Window& window, std::vector<std::string>& notes) {
  KnownConstants k = build_constants(config.constants);
  if (k.M2 || !config.constants.convex_formula) return k;
  const TimeSampling sampling{window, config.stability.n_samples};
  const int n = coeffs.grid().dim();
  if (check_H2(coeffs, config.params, n, true, sampling).status != Status::holds) return k;
  try {
    const ConvexConstants c = compute_M2_convex(coeffs, config.params, n, sampling);
    k.M2 = KnownConstant{c.M2, Provenance::convex_formula};
    k.M0 = c.M0;
    k.M0ai = c.M0ai;
  } catch (const HypothesisFailure& e) {
    notes.push_back(e.what());
  }
  return k;
}

void merge_measured(KnownConstants& k, const PersistenceEstimate& p, const BoundsEstimate& b) {
  const KnownConstants m = measured_constants(p, b);
  if (!k.eta) k.eta = m.eta;
  if (!k.M1) k.M1 = m.M1;
  if (!k.M2) k.M2 = m.M2;
  if (!k.C3_tilde) k.C3_tilde = m.C3_tilde;
}

std::pair<PersistenceEstimate, BoundsEstimate> measure(const RunConfig& config,
                                                       const std::vector<Trajectory>& runs) {
  std::vector<PersistenceEstimate> ps;
  std::vector<BoundsEstimate> bs;
  for (const auto& r : runs) {
    ps.push_back(estimate_persistence(r, config.experiment.burn_in));
    bs.push_back(estimate_bounds(r, burn_ins(config.experiment)));
  }
  return {pool(ps), pool(bs)};
}

std::vector<Trajectory> simulate_seeds(const RunConfig& config, const CoefficientSet& coeffs, int threads) {
  const auto seeds = build_seeds(config, coeffs.grid_ptr());
  RunOptions options;
  options.sample_interval = sample_interval(config);
  return run_seeds(seeds, config.time.t0, config.time.t_end, coeffs, config.params, config.stepper, options,
                   threads);
}

void print_verdict(std::ostream& out, const std::string& name, const Verdict& v) {
  out << name << " " << to_string(v.status) << "\n";
  for (const auto& c : v.clauses) {
    out << "  " << c.name << ": " << to_string(c.status);
    if (c.margin) out << " margin=" << fmt(*c.margin);
    if (!c.note.empty()) out << " (" << c.note << ")";
    out << "\n";
  }
}

void print_constant(std::ostream& out, const char* name, const std::optional<KnownConstant>& c) {
  if (c) {
    out << name << "=" << fmt(c->value) << " (" << to_string(c->source) << ")\n";
  } else {
    out << name << "=unknown\n";
  }
}

void print_report(std::ostream& out, const StabilityReport& r) {
  out << to_string(r.conclusion) << " theta=" << (r.theta ? fmt(*r.theta) : "NA") << "\n";
  if (r.eps) out << "eps=" << fmt(*r.eps) << "\n";
  print_verdict(out, "H1", r.h1);
  print_verdict(out, "H2", r.h2);
  print_verdict(out, "H3", r.h3);
  print_constant(out, "eta", r.constants.eta);
  print_constant(out, "M1", r.constants.M1);
  print_constant(out, "M2", r.constants.M2);
  print_constant(out, "C3_tilde", r.constants.C3_tilde);
  if (r.constants.M0) out << "M0=" << fmt(*r.constants.M0) << "\n";
  if (r.constants.M0ai) out << "M0ai=" << fmt(*r.constants.M0ai) << "\n";
  for (const auto& n : r.notes) out << "note: " << n << "\n";
}

StabilityReport stability_report(const RunConfig& config, int threads) {
  const GridPtr grid = build_grid(config.grid);
  const CoefficientSet coeffs = build_coefficients(config, grid);
  const Window window = stability_window(config, coeffs);
  ResolvedConstants resolved = resolve_constants(config, coeffs, config.constants.measure, threads);
  StabilityReport report =
      estimate_theta(coeffs, config.params, resolved.constants, window, config.stability.n_samples);
  for (auto& n : resolved.notes) report.notes.push_back(std::move(n));
  return report;
}

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  CsvWriter csv(os);
  const Grid& g = traj.samples.front().grid();
  csv.header({"t", "node", "x", "y", "u", "v"});
  for (const auto& s : traj.samples) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto p = g.position(i);
      csv.row({s.t, static_cast<double>(i), p[0], p[1], s.u[i], s.v[i]});
    }
  }
}

void write_diagnostics(std::ostream& os, const Trajectory& traj) {
  CsvWriter csv(os);
  csv.meta("accepted_steps", static_cast<double>(traj.stats.accepted));
  csv.meta("rejected_steps", static_cast<double>(traj.stats.rejected));
  csv.meta("clamped_nodes", static_cast<double>(traj.stats.clamped_nodes));
  csv.meta("clamped_mass", traj.stats.clamped_mass);
  csv.header({"t", "mass_u", "mass_v", "min_u", "max_u", "min_v", "max_v", "w2inf_v"});
  const auto rows = bounds_series(traj);
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const auto& s = traj.samples[k];
    csv.row({s.t, rows[k].mass_u, integrate(s.v), s.u.min(), rows[k].sup_u, s.v.min(), s.v.max(),
             rows[k].w2inf_v});
  }
}

void write_final(std::ostream& os, const ModelState& s) {
  CsvWriter csv(os);
  csv.meta("t", s.t);
  csv.header({"node", "x", "y", "u", "v"});
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const auto p = s.grid().position(i);
    csv.row({static_cast<double>(i), p[0], p[1], s.u[i], s.v[i]});
  }
}

std::string pair_kind(std::size_t a, std::size_t b) {
  return std::to_string(a) + "-" + std::to_string(b);
}

}  // namespace

Window stability_window(const RunConfig& config, const CoefficientSet& coeffs) {
  if (config.stability.window) return *config.stability.window;
  if (const auto period = coeffs.period()) return {config.time.t0, config.time.t0 + *period};
  return {config.time.t0, std::max(config.time.t_end, config.time.t0 + 1.0)};
}

ResolvedConstants resolve_constants(const RunConfig& config, const CoefficientSet& coeffs, bool measure_missing,
                                    int threads) {
  ResolvedConstants out;
  out.constants = base_constants(config, coeffs, stability_window(config, coeffs), out.notes);
  const auto& k = out.constants;
  if (measure_missing && !(k.eta && k.M1 && k.M2 && k.C3_tilde)) {
    require_run_beyond_burn_in(config);
    const auto [p, b] = measure(config, simulate_seeds(config, coeffs, threads));
    out.persistence = p;
    out.bounds = b;
    merge_measured(out.constants, p, b);
  }
  return out;
}

int cmd_simulate(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const GridPtr grid = build_grid(config.grid);
  const CoefficientSet coeffs = build_coefficients(config, grid);
  const auto runs = simulate_seeds(config, coeffs, options.threads);
  Outputs files(config, options, "simulate");
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const std::string suffix = runs.size() > 1 ? "-seed" + std::to_string(k) : "";
    {
      auto os = files.open("trajectory" + suffix);
      write_trajectory(os, runs[k]);
    }
    {
      auto os = files.open("diagnostics" + suffix);
      write_diagnostics(os, runs[k]);
    }
    {
      auto os = files.open("final" + suffix);
      write_final(os, runs[k].final_state());
    }
    const auto& s = runs[k].final_state();
    out << "seed " << k << " t=" << fmt(s.t) << " min_u=" << fmt(s.u.min()) << " max_u=" << fmt(s.u.max())
        << " mass_u=" << fmt(integrate(s.u)) << " max_v=" << fmt(s.v.max())
        << " steps=" << runs[k].stats.accepted << "\n";
  }
  files.list(out);
  return exit_code::verdict;
}

int cmd_stability(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const StabilityReport report = stability_report(config, options.threads);
  Outputs files(config, options, "stability");
  {
    auto os = files.open("stability");
    write_report(os, report);
  }
  print_report(out, report);
  files.list(out);
  return exit_code::verdict;
}

int cmd_stability_experiment(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  if (config.seeds.size() < 2) throw ValidationError("seeds", "stability experiment needs at least 2 seeds");
  require_run_beyond_burn_in(config);
  const auto& ex = config.experiment;
  const GridPtr grid = build_grid(config.grid);
  const CoefficientSet coeffs = build_coefficients(config, grid);
  const Window window = stability_window(config, coeffs);
  coeffs.validate(window, config.stability.n_samples, true);

  const auto runs = simulate_seeds(config, coeffs, options.threads);
  const auto [persistence, bounds] = measure(config, runs);
  std::vector<std::string> notes;
  KnownConstants constants = base_constants(config, coeffs, window, notes);
  merge_measured(constants, persistence, bounds);
  StabilityReport report = estimate_theta(coeffs, config.params, constants, window, config.stability.n_samples);
  for (auto& n : notes) report.notes.push_back(std::move(n));

  const bool applicable = report.theta && *report.theta < 0.0;
  const double eps = ex.eps.value_or(report.eps.value_or(0.0));
  Outputs files(config, options, "stability-experiment");
  {
    auto os = files.open("stability");
    write_report(os, report);
  }
  print_report(out, report);
  out << "eta_hat=" << fmt(persistence.eta_hat) << " M1_hat=" << fmt(bounds.M1_hat)
      << " M2_hat=" << fmt(bounds.M2_hat) << " C3_hat=" << fmt(bounds.C3_hat) << "\n";

  for (std::size_t k = 0; k < runs.size(); ++k) {
    auto os = files.open("bounds-seed" + std::to_string(k));
    CsvWriter csv(os);
    csv.header({"t", "mass_u", "sup_u", "w2inf_v"});
    for (const auto& r : bounds_series(runs[k])) csv.row({r.t, r.mass_u, r.sup_u, r.w2inf_v});
  }

  std::vector<std::vector<std::string>> summary;
  auto record = [&](const std::string& key, const std::string& value) { summary.push_back({key, value}); };
  record("eta_hat", format_double(persistence.eta_hat));
  record("xi_hat", format_double(persistence.xi_hat));
  record("persistent", persistence.persistent ? "true" : "false");
  record("M1_hat", format_double(bounds.M1_hat));
  record("M2_hat", format_double(bounds.M2_hat));
  record("C3_hat", format_double(bounds.C3_hat));

  double final_gap = 0.0;
  bool rates_ok = true;
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      const GapSeries gap = trajectory_gap(runs[a], runs[b]);
      {
        auto os = files.open("gap-" + pair_kind(a, b));
        CsvWriter csv(os);
        csv.header({"t", "E", "w_L2", "phi_L2", "w_Linf", "phi_Linf"});
        for (const auto& s : gap.samples) csv.row({s.t, s.E, s.w_L2, s.phi_L2, s.w_Linf, s.phi_Linf});
      }
      const auto& last = gap.samples.back();
      final_gap = std::max({final_gap, last.w_Linf, last.phi_Linf});
      const std::string pair = pair_kind(a, b);
      out << "pair " << pair << " final w_Linf=" << fmt(last.w_Linf) << " phi_Linf=" << fmt(last.phi_Linf)
          << "\n";
      record("final_gap " + pair, format_double(std::max(last.w_Linf, last.phi_Linf)));

      try {
        const DecayFit fit = fit_decay_rate(gap, ex.fit_window);
        out << "pair " << pair << " decay_rate=" << fmt(fit.rate) << " r2=" << fmt(fit.r2)
            << (fit.floored ? " (floored)" : "") << "\n";
        record("decay_rate " + pair, format_double(fit.rate));
        record("decay_r2 " + pair, format_double(fit.r2));
        if (applicable && !fit.floored && fit.rate > *report.theta + eps + ex.fit_tolerance) rates_ok = false;
      } catch (const RangeError& e) {
        out << "pair " << pair << " decay_rate=NA (" << e.what() << ")\n";
        record("decay_rate " + pair, "NA");
        rates_ok = false;
      }

      const GronwallResult g = gronwall_check(runs[a], runs[b], coeffs, config.params, report, eps);
      out << "pair " << pair << " gronwall " << to_string(g.status) << " fraction=" << fmt(g.fraction)
          << " intervals=" << g.intervals << " worst_margin=" << fmt(g.worst_margin)
          << (g.diagnostics.empty() ? "" : " (" + g.diagnostics + ")") << "\n";
      record("gronwall " + pair, to_string(g.status));
      record("gronwall_fraction " + pair, format_double(g.fraction));
      record("gronwall_worst_margin " + pair, format_double(g.worst_margin));
      record("gronwall_slack_at_worst " + pair, format_double(g.slack_at_worst));
      record("gronwall_band_entry " + pair, format_double(g.band_entry));
    }
  }

  // Pullback approximation of the entire solution from the first two seeds.
  const auto seeds = build_seeds(config, grid);
  const double length = coeffs.period().value_or(5.0);
  const Window span = ex.entire_span.value_or(Window{config.time.t0, config.time.t0 + length});
  EntireSolutionOptions eo{seeds[0], seeds[1], ex.entire_tolerance, sample_interval(config), options.threads};
  try {
    const EntireSolution entire =
        approximate_entire_solution(coeffs, config.params, config.stepper, ex.t_back, span, eo);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    {
      auto os = files.open("entire");
      CsvWriter csv(os);
      csv.meta("seed_gap", entire.seed_gap);
      csv.header({"t", "min_u", "max_u", "min_v", "max_v"});
      for (const auto& s : entire.segment.samples) {
        lo = std::min(lo, s.u.min());
        hi = std::max(hi, s.u.max());
        csv.row({s.t, s.u.min(), s.u.max(), s.v.min(), s.v.max()});
      }
    }
    const bool in_band = lo >= persistence.eta_hat && hi <= bounds.M2_hat;
    out << "entire_solution seed_gap=" << fmt(entire.seed_gap) << " min_u=" << fmt(lo) << " max_u=" << fmt(hi)
        << " within[eta_hat,M2_hat]=" << (in_band ? "true" : "false") << "\n";
    record("entire_seed_gap", format_double(entire.seed_gap));
    record("entire_within_band", in_band ? "true" : "false");

    const auto starts = start_time_gaps(coeffs, config.params, config.stepper, seeds[0],
                                        entire.segment.final_state(), ex.t_back, ex.start_times,
                                        options.threads);
    double worst = 0.0;
    {
      auto os = files.open("start-times");
      CsvWriter csv(os);
      csv.header({"t0", "gap"});
      for (const auto& s : starts) {
        worst = std::max(worst, s.gap);
        csv.row({s.t0, s.gap});
      }
    }
    out << "start_time_gap_max=" << fmt(worst) << " starts=" << starts.size() << "\n";
    record("start_time_gap_max", format_double(worst));
  } catch (const TBackInsufficient& e) {
    out << "entire_solution " << e.what() << "\n";
    record("entire_seed_gap", format_double(e.gap()));
    record("entire_within_band", "NA");
  }

  const std::string threshold = fmt(ex.gap_threshold);
  const bool gap_ok = final_gap < ex.gap_threshold;
  std::string verdict;
  if (!applicable) {
    verdict = "not-applicable";
  } else {
    verdict = gap_ok && rates_ok ? "true" : "false";
  }
  record("pairwise_gap_final", format_double(final_gap));
  record("pairwise_gap_below_threshold", gap_ok ? "true" : "false");
  record("rate_vs_theta", verdict);
  {
    auto os = files.open("summary");
    CsvWriter csv(os);
    csv.meta("conclusion", to_string(report.conclusion));
    csv.meta("theta", opt_cell(report.theta));
    csv.meta("eps", eps);
    csv.header({"key", "value"});
    for (const auto& row : summary) csv.row_strings(row);
  }
  out << "pairwise_gap_final=" << fmt(final_gap) << "\n";
  if (applicable) {
    out << "pairwise_gap_final < " << threshold << " rate<=theta+eps: " << verdict << "\n";
  } else {
    out << "pairwise_gap_final < " << threshold << ": " << (gap_ok ? "true" : "false")
        << " rate<=theta+eps: not-applicable\n";
  }
  files.list(out);
  return exit_code::verdict;
}

int cmd_sweep(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const auto& axes = config.sweep.axes;
  if (axes.empty()) throw ValidationError("sweep.axes", "no sweep axes declared");
  std::size_t points = 1;
  for (const auto& a : axes) points *= a.values.size();

  struct Row {
    std::vector<double> values;
    std::vector<std::string> cells;
    std::optional<double> theta;
    bool failed = false;
  };
  std::vector<Row> rows(points);
  parallel_for(points, options.threads, [&](std::size_t index) {
    Row& row = rows[index];
    RunConfig point = config;
    std::size_t rest = index;
    // Last axis varies fastest.
    row.values.resize(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      row.values[k] = axes[k].values[rest % axes[k].values.size()];
      rest /= axes[k].values.size();
    }
    for (std::size_t k = 0; k < axes.size(); ++k) set_by_key(point, axes[k].key, row.values[k]);
    point.sweep.axes.clear();
    try {
      validate_config(point);
      const StabilityReport r = stability_report(point, 1);
      row.theta = r.theta;
      auto ok = [](const Verdict& v) { return v.status == Status::holds ? "true" : "false"; };
      row.cells = {to_string(r.conclusion), opt_cell(r.theta), opt_cell(r.eps),
                   to_string(r.h1.status), to_string(r.h2.status), to_string(r.h3.status),
                   ok(r.h1), ok(r.h2), ok(r.h3),
                   r.constants.M2 ? format_double(r.constants.M2->value) : "NA",
                   r.constants.M2 ? to_string(r.constants.M2->source) : "NA", ""};
    } catch (const std::exception& e) {
      row.failed = true;
      row.cells = {"error", "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA", quote(e.what())};
    }
  });

  Outputs files(config, options, "sweep");
  std::size_t failures = 0;
  {
    auto os = files.open("sweep");
    CsvWriter csv(os);
    std::vector<std::string> header;
    for (const auto& a : axes) header.push_back(a.key);
    for (const char* c : {"conclusion", "theta", "eps", "h1", "h2", "h3", "h1_ok", "h2_ok", "h3_ok", "M2",
                          "M2_source", "error"}) {
      header.push_back(c);
    }
    csv.header(header);
    for (const auto& row : rows) {
      std::vector<std::string> cells;
      for (double v : row.values) cells.push_back(format_double(v));
      cells.insert(cells.end(), row.cells.begin(), row.cells.end());
      csv.row_strings(cells);
      failures += row.failed;
    }
  }
  out << "sweep points=" << points << " errors=" << failures << "\n";
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < axes.size(); ++k) out << axes[k].key << "=" << fmt(row.values[k]) << " ";
    out << row.cells[0] << " theta=" << (row.theta ? fmt(*row.theta) : "NA") << " h3_ok=" << row.cells[8] << "\n";
  }
  files.list(out);
  return exit_code::verdict;
}

int cmd_converge(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const auto& cv = config.converge;
  const OrderStudy spatial = laplacian_order(config.grid.dim, cv.counts);

  auto scalar = [&](const CoefficientConfig& c, double fallback) {
    return c.kind == CoefficientConfig::Kind::constant ? c.value : fallback;
  };
  const GridPtr flat = Grid::line(1.0, 5);
  const CoefficientSet coeffs =
      CoefficientSet::constant(flat, scalar(config.a0, 1.0), scalar(config.a1, 1.0), scalar(config.a2, 0.0));
  const OrderStudy temporal = temporal_order(coeffs, config.params, config.stepper, cv.dts, cv.t_end);

  Outputs files(config, options, "converge");
  {
    auto os = files.open("converge");
    CsvWriter csv(os);
    csv.header({"study", "design_order", "step", "error", "order"});
    for (const auto* s : {&spatial, &temporal}) {
      for (const auto& r : s->rows) {
        csv.row_strings(std::vector<std::string>{s->name, std::to_string(s->design_order), format_double(r.step),
                                                 format_double(r.error),
                                                 std::isnan(r.order) ? "NA" : format_double(r.order)});
      }
    }
  }
  for (const auto* s : {&spatial, &temporal}) {
    out << s->name << "_order=" << fmt(s->observed_order()) << " design=" << s->design_order << "\n";
  }
  files.list(out);
  return exit_code::verdict;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "stability", "stability-experiment", "sweep",
                                              "converge"};
  return names;
}

namespace {

int report_error(std::ostream& err, int code, const std::string& kind, const std::string& message,
                 const std::string& key = {}) {
  nlohmann::json block = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  if (!key.empty()) block["key"] = key;
  err << nlohmann::json{{"error", block}}.dump() << "\n";
  return code;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    return report_error(err, exit_code::validation, "validation", e.clause(), e.key());
  } catch (const StepSizeUnderflow& e) {
    return report_error(err, exit_code::runtime, "step-size-underflow", e.what());
  } catch (const RunAborted& e) {
    return report_error(err, exit_code::runtime, "run-aborted", e.what());
  } catch (const HypothesisFailure& e) {
    return report_error(err, exit_code::runtime, "hypothesis-failure", e.what(), e.clause());
  } catch (const std::exception& e) {
    return report_error(err, exit_code::runtime, "runtime", e.what());
  }
}

}  // namespace

int run_command(const std::string& command, const RunConfig& config, const CommandOptions& options,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig c = config;
    if (options.seed) c.seed = *options.seed;
    if (options.threads < 1) throw ValidationError("threads", "must be at least 1");
    if (command == "simulate") return cmd_simulate(c, options, out);
    if (command == "stability") return cmd_stability(c, options, out);
    if (command == "stability-experiment") return cmd_stability_experiment(c, options, out);
    if (command == "sweep") return cmd_sweep(c, options, out);
    if (command == "converge") return cmd_converge(c, options, out);
    throw ValidationError("command", "unknown command '" + command + "'");
  });
}

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const CommandOptions& options, std::ostream& out, std::ostream& err) {
  std::optional<RunConfig> config;
  const int code = guarded(err, [&] {
    config = load_config(config_path);
    return exit_code::verdict;
  });
  if (code != exit_code::verdict) return code;
  return run_command(command, *config, options, out, err);
}

}  // namespace chemostab

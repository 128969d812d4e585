#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chemostab/experiments.hpp"

namespace chemostab {

struct GridConfig {
  int dim = 1;
  std::array<double, 2> extents{1.0, 1.0};
  std::array<int, 2> counts{101, 1};
};

struct CoefficientConfig {
  enum class Kind { constant, separable, table };
  Kind kind = Kind::constant;
  double value = 0.0;
  TimeFactor time = TimeFactor::constant(1.0);
  SpatialProfile profile;
  /// Table CSV: first column t, then one column per node in grid order.
  std::string file;
  bool clamp = false;
};

struct InitialFieldConfig {
  enum class Kind { profile, random, file };
  Kind kind = Kind::profile;
  SpatialProfile profile;
  double low = 0.5;
  double high = 1.5;
  /// Defaults to the run seed plus the field's position in the seed list.
  std::optional<std::uint64_t> seed;
  std::string file;
};

struct InitialConfig {
  InitialFieldConfig u;
  InitialFieldConfig v;
};

struct TimeConfig {
  double t0 = 0.0;
  double t_end = 1.0;
  double sample_interval = 0.0;
};

struct ConstantsConfig {
  std::optional<double> M1;
  std::optional<double> M2;
  std::optional<double> eta;
  std::optional<double> C3_tilde;
  std::vector<CqPair> cq1;
  /// Estimate missing constants from simulations of the configured seeds.
  bool measure = false;
  /// Take M2 from the convex-domain formula when (H2) holds and M2 is unset.
  bool convex_formula = true;
};

struct StabilityConfig {
  std::optional<Window> window;  ///< defaults to one period, else [t0, t_end]
  int n_samples = 1000;
};

struct ExperimentConfig {
  double burn_in = 10.0;
  std::optional<std::array<double, 3>> bound_burn_ins;  ///< t1, t2, t*; default burn_in
  Window fit_window{10.0, 40.0};
  double fit_tolerance = 0.05;
  double gap_threshold = 1e-3;
  std::optional<double> eps;
  double t_back = 40.0;
  std::optional<Window> entire_span;  ///< defaults to [t0, t0 + period or 5]
  double entire_tolerance = 1e-6;
  int start_times = 8;
};

struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

struct SweepConfig {
  std::vector<SweepAxis> axes;
};

struct ConvergeConfig {
  std::vector<int> counts{21, 41, 81, 161};
  std::vector<double> dts{0.04, 0.02, 0.01, 0.005};
  double t_end = 1.0;
};

struct OutputConfig {
  std::string dir = "out";
  std::string name = "run";
};

/// Everything a command needs, validated before any computation.
struct RunConfig {
  GridConfig grid;
  ModelParams params;
  CoefficientConfig a0;
  CoefficientConfig a1;
  CoefficientConfig a2;
  InitialConfig initial;
  std::vector<InitialConfig> seeds;
  StepperConfig stepper;
  TimeConfig time;
  ConstantsConfig constants;
  StabilityConfig stability;
  ExperimentConfig experiment;
  SweepConfig sweep;
  ConvergeConfig converge;
  OutputConfig output;
  std::uint64_t seed = 0;
  /// Directory against which relative file paths resolve.
  std::filesystem::path base_dir;
};

/// Parses JSON text. Unknown keys, wrong types and out-of-range values raise
/// ValidationError naming the key path (e.g. "params.tau").
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form with every default written out.
std::string serialize_config(const RunConfig& config);

/// FNV-1a 64 over the canonical form and the bytes of referenced files.
std::string config_hash(const RunConfig& config);

/// Checks every module precondition that can be checked without running.
void validate_config(const RunConfig& config);

/// Overrides one scalar addressed by its key path; used by sweeps. Supported:
/// params.*, constants.{eta,M1,M2,C3_tilde} and coefficients.a{0,1,2}.value.
void set_by_key(RunConfig& config, const std::string& key, double value);

GridPtr build_grid(const GridConfig& config);
CoefficientSet build_coefficients(const RunConfig& config, const GridPtr& grid);
InitialData build_initial(const RunConfig& config, const InitialConfig& initial, const GridPtr& grid,
                          std::uint64_t stream);
/// The configured seeds, or the single initial datum when none are listed.
std::vector<InitialData> build_seeds(const RunConfig& config, const GridPtr& grid);
KnownConstants build_constants(const ConstantsConfig& config);

}  // namespace chemostab

#include "chemostab/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace chemostab {

using nlohmann::json;

namespace {

// Strict view of one JSON object: every key must be read, leftovers are
// reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_, "must be an object");
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* c = child(key);
    if (!c) return fallback;
    return as_number(*c, key_path(key));
  }

  std::optional<double> optional_number(const std::string& key) {
    const json* c = child(key);
    if (!c || c->is_null()) return std::nullopt;
    return as_number(*c, key_path(key));
  }

  int integer(const std::string& key, int fallback) {
    const json* c = child(key);
    if (!c) return fallback;
    if (!c->is_number_integer()) throw ValidationError(key_path(key), "must be an integer");
    return c->get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* c = child(key);
    if (!c) return fallback;
    if (!c->is_boolean()) throw ValidationError(key_path(key), "must be true or false");
    return c->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* c = child(key);
    if (!c) return fallback;
    if (!c->is_string()) throw ValidationError(key_path(key), "must be a string");
    return c->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const json* c = child(key);
    if (!c) return fallback;
    if (!c->is_array()) throw ValidationError(key_path(key), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : *c) out.push_back(as_number(x, key_path(key)));
    return out;
  }

  std::optional<Window> window(const std::string& key) {
    const json* c = child(key);
    if (!c || c->is_null()) return std::nullopt;
    if (!c->is_array() || c->size() != 2) {
      throw ValidationError(key_path(key), "must be [start, end]");
    }
    return Window{as_number((*c)[0], key_path(key)), as_number((*c)[1], key_path(key))};
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ValidationError(key_path(key), "unknown key");
    }
  }

  static double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path, "must be a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw ValidationError(path, "must be finite");
    return x;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class T>
std::array<T, 2> pair_of(const std::vector<double>& v, const std::string& path, T second) {
  if (v.empty() || v.size() > 2) throw ValidationError(path, "must have one or two entries");
  return {static_cast<T>(v[0]), v.size() > 1 ? static_cast<T>(v[1]) : second};
}

TimeFactor parse_time(const json& j, const std::string& path) {
  Reader r(j, path);
  const std::string kind = r.string("kind", "constant");
  TimeFactor out = TimeFactor::constant(1.0);
  if (kind == "constant") {
    out = TimeFactor::constant(r.number("value", 1.0));
  } else if (kind == "sinusoid") {
    out = TimeFactor::sinusoid(r.number("offset", 0.0), r.number("amplitude", 1.0),
                               r.number("frequency", 1.0), r.number("phase", 0.0));
  } else if (kind == "exp-decay") {
    const double rate = r.number("rate", 1.0);
    if (!(rate > 0.0)) throw ValidationError(r.key_path("rate"), "must be positive");
    out = TimeFactor::exp_decay(r.number("start", 1.0), r.number("limit", 1.0), rate);
  } else {
    throw ValidationError(r.key_path("kind"), "must be one of constant, sinusoid, exp-decay");
  }
  r.finish();
  return out;
}

json dump_time(const TimeFactor& f) {
  const auto& p = f.params();
  switch (f.kind()) {
    case TimeFactor::Kind::constant:
      return {{"kind", "constant"}, {"value", p[0]}};
    case TimeFactor::Kind::sinusoid:
      return {{"kind", "sinusoid"}, {"offset", p[0]}, {"amplitude", p[1]}, {"frequency", p[2]},
              {"phase", p[3]}};
    case TimeFactor::Kind::exp_decay:
      return {{"kind", "exp-decay"}, {"start", p[0]}, {"limit", p[1]}, {"rate", p[2]}};
  }
  return {};
}

// Profile keys are read from an already open reader so that initial-data
// blocks can share the same object.
SpatialProfile parse_profile_fields(Reader& r, const std::string& kind) {
  SpatialProfile out;
  auto axis = [&] {
    const int a = r.integer("axis", 0);
    if (a != 0 && a != 1) throw ValidationError(r.key_path("axis"), "must be 0 or 1");
    return a;
  };
  if (kind == "constant") {
    out.kind = SpatialProfile::Constant{r.number("value", 1.0)};
  } else if (kind == "linear-ramp") {
    SpatialProfile::LinearRamp p;
    p.start = r.number("start", p.start);
    p.end = r.number("end", p.end);
    p.axis = axis();
    out.kind = p;
  } else if (kind == "sine") {
    SpatialProfile::Sine p;
    p.offset = r.number("offset", p.offset);
    p.amplitude = r.number("amplitude", p.amplitude);
    p.mode = r.number("mode", p.mode);
    p.phase = r.number("phase", p.phase);
    p.axis = axis();
    out.kind = p;
  } else if (kind == "cosine") {
    SpatialProfile::Cosine p;
    p.offset = r.number("offset", p.offset);
    p.amplitude = r.number("amplitude", p.amplitude);
    p.modes = pair_of<double>(r.numbers("modes", {p.modes[0], p.modes[1]}), r.key_path("modes"), 0.0);
    out.kind = p;
  } else if (kind == "gaussian-bump" || kind == "bump") {
    SpatialProfile::GaussianBump p;
    p.base = r.number("base", p.base);
    p.height = r.number("height", p.height);
    p.center = pair_of<double>(r.numbers("center", {p.center[0], p.center[1]}), r.key_path("center"), 0.0);
    p.width = r.number("width", p.width);
    if (!(p.width > 0.0)) throw ValidationError(r.key_path("width"), "must be positive");
    out.kind = p;
  } else {
    throw ValidationError(r.key_path("kind"), "unknown profile '" + kind + "'");
  }
  return out;
}

SpatialProfile parse_profile(const json& j, const std::string& path) {
  Reader r(j, path);
  const std::string kind = r.string("kind", "constant");
  SpatialProfile out = parse_profile_fields(r, kind);
  r.finish();
  return out;
}

json dump_profile(const SpatialProfile& p) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SpatialProfile::Constant>) {
          return {{"kind", "constant"}, {"value", k.value}};
        } else if constexpr (std::is_same_v<K, SpatialProfile::LinearRamp>) {
          return {{"kind", "linear-ramp"}, {"start", k.start}, {"end", k.end}, {"axis", k.axis}};
        } else if constexpr (std::is_same_v<K, SpatialProfile::Sine>) {
          return {{"kind", "sine"},   {"offset", k.offset}, {"amplitude", k.amplitude},
                  {"mode", k.mode},   {"phase", k.phase},   {"axis", k.axis}};
        } else if constexpr (std::is_same_v<K, SpatialProfile::Cosine>) {
          return {{"kind", "cosine"}, {"offset", k.offset}, {"amplitude", k.amplitude},
                  {"modes", {k.modes[0], k.modes[1]}}};
        } else {
          return {{"kind", "gaussian-bump"}, {"base", k.base}, {"height", k.height},
                  {"center", {k.center[0], k.center[1]}}, {"width", k.width}};
        }
      },
      p.kind);
}

CoefficientConfig parse_coefficient(const json& j, const std::string& path) {
  CoefficientConfig out;
  if (j.is_number()) {
    out.value = Reader::as_number(j, path);
    return out;
  }
  Reader r(j, path);
  const std::string kind = r.string("kind", "constant");
  if (kind == "constant") {
    out.kind = CoefficientConfig::Kind::constant;
    out.value = r.number("value", 0.0);
  } else if (kind == "separable") {
    out.kind = CoefficientConfig::Kind::separable;
    if (const json* t = r.child("time")) out.time = parse_time(*t, r.key_path("time"));
    if (const json* p = r.child("profile")) out.profile = parse_profile(*p, r.key_path("profile"));
  } else if (kind == "table") {
    out.kind = CoefficientConfig::Kind::table;
    out.file = r.string("file", "");
    if (out.file.empty()) throw ValidationError(r.key_path("file"), "required for table coefficients");
    out.clamp = r.boolean("clamp", false);
  } else {
    throw ValidationError(r.key_path("kind"), "must be one of constant, separable, table");
  }
  r.finish();
  return out;
}

json dump_coefficient(const CoefficientConfig& c) {
  switch (c.kind) {
    case CoefficientConfig::Kind::constant:
      return {{"kind", "constant"}, {"value", c.value}};
    case CoefficientConfig::Kind::separable:
      return {{"kind", "separable"}, {"time", dump_time(c.time)}, {"profile", dump_profile(c.profile)}};
    case CoefficientConfig::Kind::table:
      return {{"kind", "table"}, {"file", c.file}, {"clamp", c.clamp}};
  }
  return {};
}

InitialFieldConfig parse_initial_field(const json& j, const std::string& path) {
  InitialFieldConfig out;
  if (j.is_number()) {
    out.profile.kind = SpatialProfile::Constant{Reader::as_number(j, path)};
    return out;
  }
  Reader r(j, path);
  const std::string kind = r.string("kind", "constant");
  if (kind == "random-positive") {
    out.kind = InitialFieldConfig::Kind::random;
    out.low = r.number("low", out.low);
    out.high = r.number("high", out.high);
    if (!(out.low > 0.0 && out.high >= out.low)) {
      throw ValidationError(r.key_path("low"), "need 0 < low <= high");
    }
    if (const json* s = r.child("seed")) {
      if (!s->is_number_unsigned()) throw ValidationError(r.key_path("seed"), "must be a nonnegative integer");
      out.seed = s->get<std::uint64_t>();
    }
  } else if (kind == "file") {
    out.kind = InitialFieldConfig::Kind::file;
    out.file = r.string("file", "");
    if (out.file.empty()) throw ValidationError(r.key_path("file"), "required for file initial data");
  } else {
    out.profile = parse_profile_fields(r, kind);
  }
  r.finish();
  return out;
}

json dump_initial_field(const InitialFieldConfig& f) {
  switch (f.kind) {
    case InitialFieldConfig::Kind::profile:
      return dump_profile(f.profile);
    case InitialFieldConfig::Kind::random: {
      json j = {{"kind", "random-positive"}, {"low", f.low}, {"high", f.high}};
      if (f.seed) j["seed"] = *f.seed;
      return j;
    }
    case InitialFieldConfig::Kind::file:
      return {{"kind", "file"}, {"file", f.file}};
  }
  return {};
}

InitialConfig parse_initial(const json& j, const std::string& path) {
  Reader r(j, path);
  InitialConfig out;
  out.v.profile.kind = SpatialProfile::Constant{0.0};
  if (const json* u = r.child("u")) out.u = parse_initial_field(*u, r.key_path("u"));
  if (const json* v = r.child("v")) out.v = parse_initial_field(*v, r.key_path("v"));
  r.finish();
  return out;
}

json dump_initial(const InitialConfig& c) {
  return {{"u", dump_initial_field(c.u)}, {"v", dump_initial_field(c.v)}};
}

json dump_window(const std::optional<Window>& w) {
  if (!w) return nullptr;
  return {w->start, w->end};
}

std::string read_file(const std::filesystem::path& path, const std::string& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(key, "cannot read file '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Numeric CSV rows; '#' lines and a leading non-numeric header are skipped.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path,
                                                  const std::string& key) {
  std::istringstream in(read_file(path, key));
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first && rows.empty()) {
        first = false;
        continue;
      }
      throw ValidationError(key, "non-numeric row in '" + path.string() + "'");
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::filesystem::path resolve(const RunConfig& config, const std::string& file) {
  std::filesystem::path p(file);
  return p.is_absolute() ? p : config.base_dir / p;
}

CoefficientSpec build_coefficient(const RunConfig& config, const CoefficientConfig& c,
                                  const GridPtr& grid, const std::string& key) {
  switch (c.kind) {
    case CoefficientConfig::Kind::constant:
      return CoefficientSpec::constant(grid, c.value);
    case CoefficientConfig::Kind::separable:
      return CoefficientSpec(grid, CoefficientSpec::Separable{c.time, c.profile});
    case CoefficientConfig::Kind::table: {
      CoefficientSpec::Tabulated tab;
      const auto path = resolve(config, c.file);
      for (auto& row : read_numeric_csv(path, key)) {
        if (row.size() != grid->size() + 1) {
          throw ValidationError(key, "table rows need t plus " + std::to_string(grid->size()) +
                                         " nodal values");
        }
        tab.times.push_back(row.front());
        tab.samples.emplace_back(row.begin() + 1, row.end());
      }
      tab.clamp = c.clamp;
      tab.source = path.string();
      try {
        return CoefficientSpec(grid, std::move(tab));
      } catch (const ValidationError&) {
        throw;
      } catch (const Error& e) {
        throw ValidationError(key, e.what());
      }
    }
  }
  throw ValidationError(key, "unknown coefficient kind");
}

std::vector<double> random_values(std::size_t n, double low, double high, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x = low + (high - low) * unit;
  }
  return out;
}

Field build_field(const RunConfig& config, const InitialFieldConfig& f, const GridPtr& grid,
                  std::uint64_t stream, const std::string& key) {
  switch (f.kind) {
    case InitialFieldConfig::Kind::profile:
      return f.profile.sample(grid);
    case InitialFieldConfig::Kind::random:
      return Field(grid, random_values(grid->size(), f.low, f.high, f.seed.value_or(config.seed + stream)));
    case InitialFieldConfig::Kind::file: {
      std::vector<double> values;
      for (const auto& row : read_numeric_csv(resolve(config, f.file), key)) {
        values.push_back(row.back());
      }
      if (values.size() != grid->size()) {
        throw ValidationError(key, "file has " + std::to_string(values.size()) + " values, grid has " +
                                       std::to_string(grid->size()));
      }
      return Field(grid, std::move(values));
    }
  }
  throw ValidationError(key, "unknown initial data kind");
}

void check_nonnegative(const Field& f, const std::string& key) {
  if (f.min() < 0.0) throw ValidationError(key, "initial data must be nonnegative");
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("malformed JSON: ") + e.what());
  }
  RunConfig c;
  c.base_dir = base_dir;
  Reader root(j, "");

  if (const json* g = root.child("grid")) {
    Reader r(*g, "grid");
    c.grid.dim = r.integer("dim", 1);
    if (c.grid.dim != 1 && c.grid.dim != 2) throw ValidationError("grid.dim", "must be 1 or 2");
    c.grid.extents = pair_of<double>(r.numbers("extents", {1.0}), "grid.extents", 1.0);
    c.grid.counts = pair_of<int>(r.numbers("counts", {101.0}), "grid.counts", c.grid.dim == 2 ? 0 : 1);
    if (c.grid.dim == 1) {
      c.grid.extents[1] = 1.0;
      c.grid.counts[1] = 1;
    }
    r.finish();
  }
  if (const json* p = root.child("params")) {
    Reader r(*p, "params");
    c.params.chi = r.number("chi", c.params.chi);
    c.params.tau = r.number("tau", c.params.tau);
    c.params.lambda = r.number("lambda", c.params.lambda);
    c.params.mu = r.number("mu", c.params.mu);
    r.finish();
  }
  c.a0.value = 1.0;
  c.a1.value = 1.0;
  if (const json* co = root.child("coefficients")) {
    Reader r(*co, "coefficients");
    if (const json* a = r.child("a0")) c.a0 = parse_coefficient(*a, "coefficients.a0");
    if (const json* a = r.child("a1")) c.a1 = parse_coefficient(*a, "coefficients.a1");
    if (const json* a = r.child("a2")) c.a2 = parse_coefficient(*a, "coefficients.a2");
    r.finish();
  }
  c.initial.v.profile.kind = SpatialProfile::Constant{0.0};
  if (const json* i = root.child("initial")) c.initial = parse_initial(*i, "initial");
  if (const json* s = root.child("seeds")) {
    if (!s->is_array()) throw ValidationError("seeds", "must be an array");
    for (std::size_t k = 0; k < s->size(); ++k) {
      c.seeds.push_back(parse_initial((*s)[k], "seeds." + std::to_string(k)));
    }
  }
  if (const json* s = root.child("stepper")) {
    Reader r(*s, "stepper");
    auto& st = c.stepper;
    st.dt_init = r.number("dt_init", st.dt_init);
    st.dt_min = r.number("dt_min", st.dt_min);
    st.dt_max = r.number("dt_max", st.dt_max);
    st.safety = r.number("safety", st.safety);
    st.positivity_floor = r.number("positivity_floor", st.positivity_floor);
    st.theta = r.number("theta", st.theta);
    st.error_tol = r.number("error_tol", st.error_tol);
    st.adaptive = r.boolean("adaptive", st.adaptive);
    st.clamp_budget = r.number("clamp_budget", st.clamp_budget);
    r.finish();
  }
  if (const json* t = root.child("time")) {
    Reader r(*t, "time");
    c.time.t0 = r.number("t0", c.time.t0);
    c.time.t_end = r.number("t_end", c.time.t_end);
    c.time.sample_interval = r.number("sample_interval", c.time.sample_interval);
    r.finish();
  }
  if (const json* k = root.child("constants")) {
    Reader r(*k, "constants");
    c.constants.M1 = r.optional_number("M1");
    c.constants.M2 = r.optional_number("M2");
    c.constants.eta = r.optional_number("eta");
    c.constants.C3_tilde = r.optional_number("C3_tilde");
    if (const json* q = r.child("cq1")) {
      if (!q->is_array()) throw ValidationError("constants.cq1", "must be a list of [q, C] pairs");
      for (const auto& pair : *q) {
        if (!pair.is_array() || pair.size() != 2) {
          throw ValidationError("constants.cq1", "must be a list of [q, C] pairs");
        }
        c.constants.cq1.push_back({Reader::as_number(pair[0], "constants.cq1"),
                                   Reader::as_number(pair[1], "constants.cq1")});
      }
    }
    c.constants.measure = r.boolean("measure", c.constants.measure);
    c.constants.convex_formula = r.boolean("convex_formula", c.constants.convex_formula);
    r.finish();
  }
  if (const json* s = root.child("stability")) {
    Reader r(*s, "stability");
    c.stability.window = r.window("window");
    c.stability.n_samples = r.integer("n_samples", c.stability.n_samples);
    r.finish();
  }
  if (const json* e = root.child("experiment")) {
    Reader r(*e, "experiment");
    auto& ex = c.experiment;
    ex.burn_in = r.number("burn_in", ex.burn_in);
    if (const json* b = r.child("bound_burn_ins")) {
      if (!b->is_array() || b->size() != 3) {
        throw ValidationError("experiment.bound_burn_ins", "must be [t1, t2, t_star]");
      }
      ex.bound_burn_ins = std::array<double, 3>{};
      for (int k = 0; k < 3; ++k) {
        (*ex.bound_burn_ins)[k] = Reader::as_number((*b)[k], "experiment.bound_burn_ins");
      }
    }
    ex.fit_window = r.window("fit_window").value_or(ex.fit_window);
    ex.fit_tolerance = r.number("fit_tolerance", ex.fit_tolerance);
    ex.gap_threshold = r.number("gap_threshold", ex.gap_threshold);
    ex.eps = r.optional_number("eps");
    ex.t_back = r.number("t_back", ex.t_back);
    ex.entire_span = r.window("entire_span");
    ex.entire_tolerance = r.number("entire_tolerance", ex.entire_tolerance);
    ex.start_times = r.integer("start_times", ex.start_times);
    r.finish();
  }
  if (const json* s = root.child("sweep")) {
    Reader r(*s, "sweep");
    if (const json* axes = r.child("axes")) {
      if (!axes->is_array()) throw ValidationError("sweep.axes", "must be an array");
      for (std::size_t k = 0; k < axes->size(); ++k) {
        const std::string path = "sweep.axes." + std::to_string(k);
        Reader a((*axes)[k], path);
        SweepAxis axis;
        axis.key = a.string("key", "");
        if (a.has("values")) {
          axis.values = a.numbers("values", {});
        } else {
          const double start = a.number("start", 0.0);
          const double stop = a.number("stop", 0.0);
          const int count = a.integer("count", 0);
          if (count < 1) throw ValidationError(path + ".count", "must be positive");
          for (int i = 0; i < count; ++i) {
            axis.values.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
          }
        }
        a.finish();
        c.sweep.axes.push_back(std::move(axis));
      }
    }
    r.finish();
  }
  if (const json* v = root.child("converge")) {
    Reader r(*v, "converge");
    std::vector<double> counts(c.converge.counts.begin(), c.converge.counts.end());
    counts = r.numbers("counts", counts);
    c.converge.counts.assign(counts.begin(), counts.end());
    for (double n : counts) {
      if (n != std::floor(n)) throw ValidationError("converge.counts", "must be integers");
    }
    c.converge.dts = r.numbers("dts", c.converge.dts);
    c.converge.t_end = r.number("t_end", c.converge.t_end);
    r.finish();
  }
  if (const json* o = root.child("output")) {
    Reader r(*o, "output");
    c.output.dir = r.string("dir", c.output.dir);
    c.output.name = r.string("name", c.output.name);
    r.finish();
  }
  if (const json* s = root.child("seed")) {
    if (!s->is_number_unsigned()) throw ValidationError("seed", "must be a nonnegative integer");
    c.seed = s->get<std::uint64_t>();
  }
  root.finish();

  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path, "config"), path.parent_path());
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["grid"] = {{"dim", c.grid.dim}};
  if (c.grid.dim == 1) {
    j["grid"]["extents"] = {c.grid.extents[0]};
    j["grid"]["counts"] = {c.grid.counts[0]};
  } else {
    j["grid"]["extents"] = {c.grid.extents[0], c.grid.extents[1]};
    j["grid"]["counts"] = {c.grid.counts[0], c.grid.counts[1]};
  }
  j["params"] = {{"chi", c.params.chi}, {"tau", c.params.tau}, {"lambda", c.params.lambda},
                 {"mu", c.params.mu}};
  j["coefficients"] = {{"a0", dump_coefficient(c.a0)},
                       {"a1", dump_coefficient(c.a1)},
                       {"a2", dump_coefficient(c.a2)}};
  j["initial"] = dump_initial(c.initial);
  j["seeds"] = json::array();
  for (const auto& s : c.seeds) j["seeds"].push_back(dump_initial(s));
  const auto& st = c.stepper;
  j["stepper"] = {{"dt_init", st.dt_init},     {"dt_min", st.dt_min},
                  {"dt_max", st.dt_max},       {"safety", st.safety},
                  {"positivity_floor", st.positivity_floor},
                  {"theta", st.theta},         {"error_tol", st.error_tol},
                  {"adaptive", st.adaptive},   {"clamp_budget", st.clamp_budget}};
  j["time"] = {{"t0", c.time.t0}, {"t_end", c.time.t_end}, {"sample_interval", c.time.sample_interval}};
  json k = {{"measure", c.constants.measure}, {"convex_formula", c.constants.convex_formula}};
  if (c.constants.M1) k["M1"] = *c.constants.M1;
  if (c.constants.M2) k["M2"] = *c.constants.M2;
  if (c.constants.eta) k["eta"] = *c.constants.eta;
  if (c.constants.C3_tilde) k["C3_tilde"] = *c.constants.C3_tilde;
  k["cq1"] = json::array();
  for (const auto& p : c.constants.cq1) k["cq1"].push_back({p.q, p.c});
  j["constants"] = k;
  j["stability"] = {{"window", dump_window(c.stability.window)}, {"n_samples", c.stability.n_samples}};
  const auto& ex = c.experiment;
  json e = {{"burn_in", ex.burn_in},
            {"fit_window", dump_window(ex.fit_window)},
            {"fit_tolerance", ex.fit_tolerance},
            {"gap_threshold", ex.gap_threshold},
            {"t_back", ex.t_back},
            {"entire_span", dump_window(ex.entire_span)},
            {"entire_tolerance", ex.entire_tolerance},
            {"start_times", ex.start_times}};
  if (ex.bound_burn_ins) {
    e["bound_burn_ins"] = {(*ex.bound_burn_ins)[0], (*ex.bound_burn_ins)[1], (*ex.bound_burn_ins)[2]};
  }
  if (ex.eps) e["eps"] = *ex.eps;
  j["experiment"] = e;
  json axes = json::array();
  for (const auto& a : c.sweep.axes) axes.push_back({{"key", a.key}, {"values", a.values}});
  j["sweep"] = {{"axes", axes}};
  j["converge"] = {{"counts", c.converge.counts}, {"dts", c.converge.dts}, {"t_end", c.converge.t_end}};
  j["output"] = {{"dir", c.output.dir}, {"name", c.output.name}};
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const std::string& bytes) {
    for (unsigned char ch : bytes) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  feed(serialize_config(config));
  for (const auto* c : {&config.a0, &config.a1, &config.a2}) {
    if (c->kind == CoefficientConfig::Kind::table) feed(read_file(resolve(config, c->file), "coefficients"));
  }
  std::vector<const InitialConfig*> initials{&config.initial};
  for (const auto& s : config.seeds) initials.push_back(&s);
  for (const auto* i : initials) {
    for (const auto* f : {&i->u, &i->v}) {
      if (f->kind == InitialFieldConfig::Kind::file) feed(read_file(resolve(config, f->file), "initial"));
    }
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

void validate_config(const RunConfig& c) {
  for (int axis = 0; axis < c.grid.dim; ++axis) {
    if (!(c.grid.extents[axis] > 0.0)) throw ValidationError("grid.extents", "must be positive");
    if (c.grid.counts[axis] < 3) throw ValidationError("grid.counts", "need at least 3 nodes per axis");
  }
  c.params.validate();
  c.stepper.validate();
  if (!(c.time.t_end >= c.time.t0)) throw ValidationError("time.t_end", "must not precede time.t0");
  if (c.time.sample_interval < 0.0) throw ValidationError("time.sample_interval", "must be nonnegative");

  const GridPtr grid = build_grid(c.grid);
  const CoefficientSet coeffs = build_coefficients(c, grid);
  if (c.stability.n_samples < 2) throw ValidationError("stability.n_samples", "must be at least 2");
  if (c.stability.window && !(c.stability.window->end > c.stability.window->start)) {
    throw ValidationError("stability.window", "must have positive length");
  }
  const Window window = c.stability.window.value_or(Window{c.time.t0, std::max(c.time.t_end, c.time.t0 + 1.0)});
  for (const auto& [spec, key] : {std::pair{&coeffs.a0, "coefficients.a0"},
                                  std::pair{&coeffs.a1, "coefficients.a1"},
                                  std::pair{&coeffs.a2, "coefficients.a2"}}) {
    if (const auto* tab = std::get_if<CoefficientSpec::Tabulated>(&spec->kind())) {
      if (!tab->clamp && (window.start < tab->times.front() || window.end > tab->times.back())) {
        throw ValidationError(key, "table does not cover the time window; enable clamp or extend it");
      }
    }
  }
  coeffs.validate(window, c.stability.n_samples, false);

  build_seeds(c, grid);
  build_constants(c.constants).validate();

  const auto& ex = c.experiment;
  if (!(ex.burn_in >= 0.0)) throw ValidationError("experiment.burn_in", "must be nonnegative");
  if (!(ex.fit_window.end > ex.fit_window.start)) {
    throw ValidationError("experiment.fit_window", "must have positive length");
  }
  if (!(ex.t_back > 0.0)) throw ValidationError("experiment.t_back", "must be positive");
  if (!(ex.entire_tolerance > 0.0)) throw ValidationError("experiment.entire_tolerance", "must be positive");
  if (!(ex.gap_threshold > 0.0)) throw ValidationError("experiment.gap_threshold", "must be positive");
  if (ex.eps && !(*ex.eps > 0.0)) throw ValidationError("experiment.eps", "must be positive");
  if (ex.entire_span && !(ex.entire_span->end > ex.entire_span->start)) {
    throw ValidationError("experiment.entire_span", "must have positive length");
  }
  if (ex.start_times < 1) throw ValidationError("experiment.start_times", "must be positive");

  for (std::size_t k = 0; k < c.sweep.axes.size(); ++k) {
    const auto& axis = c.sweep.axes[k];
    const std::string path = "sweep.axes." + std::to_string(k);
    if (axis.values.empty()) throw ValidationError(path + ".values", "must not be empty");
    RunConfig probe = c;
    probe.sweep.axes.clear();
    set_by_key(probe, axis.key, axis.values.front());
  }

  const auto& cv = c.converge;
  if (cv.counts.size() < 3) throw ValidationError("converge.counts", "need at least 3 refinements");
  if (cv.dts.size() < 3) throw ValidationError("converge.dts", "need at least 3 refinements");
  for (std::size_t k = 0; k < cv.counts.size(); ++k) {
    if (cv.counts[k] < 3 || (k > 0 && cv.counts[k] <= cv.counts[k - 1])) {
      throw ValidationError("converge.counts", "must be increasing and at least 3");
    }
  }
  for (std::size_t k = 0; k < cv.dts.size(); ++k) {
    if (!(cv.dts[k] > 0.0) || (k > 0 && cv.dts[k] >= cv.dts[k - 1])) {
      throw ValidationError("converge.dts", "must be positive and decreasing");
    }
  }
  if (!(cv.t_end > 0.0)) throw ValidationError("converge.t_end", "must be positive");
  if (c.output.name.empty()) throw ValidationError("output.name", "must not be empty");
}

void set_by_key(RunConfig& c, const std::string& key, double value) {
  if (key == "params.chi") {
    c.params.chi = value;
  } else if (key == "params.tau") {
    c.params.tau = value;
  } else if (key == "params.lambda") {
    c.params.lambda = value;
  } else if (key == "params.mu") {
    c.params.mu = value;
  } else if (key == "constants.eta") {
    c.constants.eta = value;
  } else if (key == "constants.M1") {
    c.constants.M1 = value;
  } else if (key == "constants.M2") {
    c.constants.M2 = value;
  } else if (key == "constants.C3_tilde") {
    c.constants.C3_tilde = value;
  } else if (key == "coefficients.a0.value" || key == "coefficients.a1.value" ||
             key == "coefficients.a2.value") {
    CoefficientConfig& coef = key[14] == '0' ? c.a0 : key[14] == '1' ? c.a1 : c.a2;
    if (coef.kind != CoefficientConfig::Kind::constant) {
      throw ValidationError(key, "only constant coefficients can be swept");
    }
    coef.value = value;
  } else {
    throw ValidationError(key, "not a sweepable key");
  }
}

GridPtr build_grid(const GridConfig& config) {
  if (config.dim == 1) return Grid::line(config.extents[0], config.counts[0]);
  return Grid::rectangle(config.extents[0], config.extents[1], config.counts[0], config.counts[1]);
}

CoefficientSet build_coefficients(const RunConfig& config, const GridPtr& grid) {
  return CoefficientSet(build_coefficient(config, config.a0, grid, "coefficients.a0"),
                        build_coefficient(config, config.a1, grid, "coefficients.a1"),
                        build_coefficient(config, config.a2, grid, "coefficients.a2"));
}

InitialData build_initial(const RunConfig& config, const InitialConfig& initial, const GridPtr& grid,
                          std::uint64_t stream) {
  const std::string prefix = "initial";
  InitialData out{build_field(config, initial.u, grid, 2 * stream, prefix + ".u"),
                  build_field(config, initial.v, grid, 2 * stream + 1, prefix + ".v")};
  check_nonnegative(out.u, prefix + ".u");
  check_nonnegative(out.v, prefix + ".v");
  return out;
}

std::vector<InitialData> build_seeds(const RunConfig& config, const GridPtr& grid) {
  std::vector<InitialData> out;
  if (config.seeds.empty()) {
    out.push_back(build_initial(config, config.initial, grid, 0));
    return out;
  }
  for (std::size_t k = 0; k < config.seeds.size(); ++k) {
    try {
      out.push_back(build_initial(config, config.seeds[k], grid, k));
    } catch (const ValidationError& e) {
      throw ValidationError("seeds." + std::to_string(k) + e.key().substr(std::string("initial").size()),
                            e.clause());
    }
  }
  return out;
}

KnownConstants build_constants(const ConstantsConfig& config) {
  KnownConstants k;
  auto tag = [](const std::optional<double>& v) -> std::optional<KnownConstant> {
    if (!v) return std::nullopt;
    return KnownConstant{*v, Provenance::config};
  };
  k.M1 = tag(config.M1);
  k.M2 = tag(config.M2);
  k.eta = tag(config.eta);
  k.C3_tilde = tag(config.C3_tilde);
  k.cq1 = config.cq1;
  return k;
}

}  // namespace chemostab

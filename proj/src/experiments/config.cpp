#include <fstream>
#include <set>
#include <sstream>

#include "chernoff/experiments.hpp"
#include "chernoff/fit.hpp"
#include "chernoff/manifold.hpp"
#include "chernoff/test_functions.hpp"

namespace chernoff::experiments {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::InvalidConfig, path + ": " + message);
}

// Reads fields of one JSON object and remembers which were used, so that
// finish() can reject everything else.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& at(const std::string& key) {
    if (!j_.contains(key)) fail(field(key), "missing field");
    used_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    const Json& v = at(key);
    return convert<T>(v, field(key));
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  template <typename T>
  std::optional<T> maybe(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get<T>(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(field(it.key()), "unknown field");
    }
  }

  template <typename T>
  static T convert(const Json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) fail(path, "expected a number");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer()) fail(path, "expected an integer");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(path, "expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(path, "expected a string");
    } else {
      if (!v.is_array()) fail(path, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<typename T::value_type>(v[i], path + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
    return v.get<T>();
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) fail(path, message);
}

ManifoldConfig parse_manifold(Fields f) {
  ManifoldConfig m;
  const std::string kind = f.get<std::string>("kind");
  const double radius = f.get<double>("radius");
  require(radius > 0.0, f.field("radius"), "must be positive");
  const auto res = f.get<std::vector<int>>("resolution");
  if (kind == "circle") {
    m.spec = ManifoldSpec::circle(radius);
    require(res.size() == 1, f.field("resolution"), "circle takes one node count");
    require(res[0] >= 8, f.field("resolution"), "circle needs at least 8 nodes");
    m.resolution = {res[0], 0};
  } else if (kind == "sphere") {
    m.spec = ManifoldSpec::sphere(radius);
    require(res.size() == 2, f.field("resolution"), "sphere takes [n_colat, n_lon]");
    require(res[0] >= 8 && res[1] >= 8, f.field("resolution"), "sphere needs at least 8 rings and longitudes");
    m.resolution = {res[0], res[1]};
  } else {
    fail(f.field("kind"), "expected circle or sphere");
  }
  f.finish();
  return m;
}

ScalarProfile parse_profile(Fields& f) {
  const std::string family = f.get<std::string>("family");
  const double a = f.get<double>("a");
  const double b = f.get_or<double>("b", 0.0);
  if (family == "constant") {
    require(!f.has("b") || b == 0.0, f.field("b"), "constant profile takes no slope");
    return ScalarProfile::constant(a);
  }
  if (family == "affine") return ScalarProfile::affine(a, b);
  if (family == "exponential") return ScalarProfile::exponential(a, b);
  fail(f.field("family"), "expected constant, affine or exponential");
}

TimeScaling parse_scaling(Fields f) {
  const std::string mode = f.get<std::string>("mode");
  TimeScaling out = TimeScaling::identity();
  if (mode == "identity") {
  } else if (mode == "scalar") {
    out = TimeScaling::scalar(parse_profile(f));
  } else if (mode == "diagonal") {
    const Json& axes = f.at("axes");
    require(axes.is_array() && !axes.empty(), f.field("axes"), "expected a non-empty array");
    std::vector<ScalarProfile> profiles;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      Fields a(axes[i], f.field("axes") + "[" + std::to_string(i) + "]");
      profiles.push_back(parse_profile(a));
      a.finish();
    }
    out = TimeScaling::diagonal(std::move(profiles));
  } else {
    fail(f.field("mode"), "expected identity, scalar or diagonal");
  }
  f.finish();
  return out;
}

void check_function(const std::string& id, const ManifoldSpec& spec, const std::string& path) {
  try {
    TestFunction::parse(id).check_compatible(spec);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

Eigen::VectorXd parse_point(Fields& f, const std::string& key, const ManifoldSpec& spec) {
  const auto coords = f.get<std::vector<double>>(key);
  require(static_cast<int>(coords.size()) == spec.ambient_dim(), f.field(key), "wrong number of coordinates");
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size()));
  require(on_manifold(spec, p), f.field(key), "point is not on the manifold");
  return p;
}

bool strictly_ascending(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i - 1] < v[i])) return false;
  }
  return true;
}

bool strictly_descending(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i - 1] > v[i])) return false;
  }
  return true;
}

std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

StudyConfig parse_study(Fields f, const ManifoldSpec& spec) {
  StudyConfig s;
  s.function = f.get<std::string>("function");
  check_function(s.function, spec, f.field("function"));
  s.n_list = f.get<std::vector<int>>("n_list");
  require(s.n_list.size() >= 3, f.field("n_list"), "need at least 3 entries");
  require(s.n_list.front() >= 1 && strictly_ascending(as_doubles(s.n_list)), f.field("n_list"),
          "must be positive and strictly ascending");
  const std::string reference = f.get<std::string>("reference");
  if (reference == "self") {
    s.self_reference = true;
    require(s.n_list.back() >= 4 * s.n_list.front(), f.field("n_list"), "self reference needs last >= 4 x first");
  } else if (reference != "spectral") {
    fail(f.field("reference"), "expected spectral or self");
  }
  s.max_final_error = f.maybe<double>("max_final_error");
  s.min_order = f.maybe<double>("min_order");
  s.require_decreasing = f.get_or<bool>("require_decreasing", true);
  f.finish();
  return s;
}

GeneratorConfig parse_generator(Fields f, const ManifoldSpec& spec) {
  GeneratorConfig g;
  g.functions = f.get<std::vector<std::string>>("functions");
  require(!g.functions.empty(), f.field("functions"), "must not be empty");
  for (std::size_t i = 0; i < g.functions.size(); ++i) {
    check_function(g.functions[i], spec, f.field("functions") + "[" + std::to_string(i) + "]");
  }
  g.times = f.get<std::vector<double>>("times");
  require(!g.times.empty(), f.field("times"), "must not be empty");
  g.h_list = f.get<std::vector<double>>("h_list");
  require(g.h_list.size() >= 2 && g.h_list.back() > 0.0 && strictly_descending(g.h_list), f.field("h_list"),
          "need at least 2 positive, strictly descending steps");
  g.min_exponent = f.get_or<double>("min_exponent", 0.4);
  g.require_decreasing = f.get_or<bool>("require_decreasing", true);
  f.finish();
  return g;
}

InvariantsConfig parse_invariants(Fields f) {
  InvariantsConfig c;
  c.steps = f.get_or<int>("steps", 16);
  require(c.steps >= 1, f.field("steps"), "must be at least 1");
  c.tolerance = f.get_or<double>("tolerance", 1e-12);
  require(c.tolerance > 0.0, f.field("tolerance"), "must be positive");
  c.drift_samples = f.get_or<int>("drift_samples", 64);
  require(c.drift_samples >= 1, f.field("drift_samples"), "must be at least 1");
  f.finish();
  return c;
}

ConvergeConfig parse_converge(Fields f, const ExperimentConfig& cfg) {
  ConvergeConfig c;
  const ManifoldSpec& spec = cfg.manifold.spec;
  if (f.has("study")) c.study = parse_study(Fields(f.at("study"), f.field("study")), spec);
  if (f.has("generator_consistency")) {
    c.generator = parse_generator(Fields(f.at("generator_consistency"), f.field("generator_consistency")), spec);
    require(cfg.scaling.is_scalar(), f.field("generator_consistency"), "needs a scalar or identity scaling");
    for (double t : c.generator->times) {
      require(t - c.generator->h_list.front() >= cfg.interval->first && t <= cfg.interval->second,
              f.field("generator_consistency.times"), "every [t - h, t] must lie in the interval");
    }
  }
  if (f.has("invariants")) c.invariants = parse_invariants(Fields(f.at("invariants"), f.field("invariants")));
  require(c.study || c.generator || c.invariants, f.field(""), "needs study, generator_consistency or invariants");
  f.finish();
  return c;
}

AsymptoticsConfig parse_asymptotics(Fields f, const ManifoldSpec& spec) {
  AsymptoticsConfig a;
  Fields ts(f.at("t_samples"), f.field("t_samples"));
  const double lo = ts.get<double>("min");
  const double hi = ts.get<double>("max");
  const int count = ts.get<int>("count");
  ts.finish();
  require(lo > 0.0 && hi >= 10.0 * lo, f.field("t_samples"), "need 0 < min and max >= 10 min");
  require(count >= 6, f.field("t_samples.count"), "need at least 6 samples");
  a.t_samples = log_spaced(lo, hi, count);

  const Json& cases = f.at("cases");
  require(cases.is_array() && !cases.empty(), f.field("cases"), "expected a non-empty array");
  for (std::size_t i = 0; i < cases.size(); ++i) {
    Fields c(cases[i], f.field("cases") + "[" + std::to_string(i) + "]");
    AsymptoticCase ac;
    ac.label = c.get<std::string>("label");
    ac.function = c.get<std::string>("function");
    check_function(ac.function, spec, c.field("function"));
    ac.point = parse_point(c, "point", spec);
    const std::string kind = c.get<std::string>("kind");
    if (kind == "normalized") {
      ac.source = ExpansionSource::normalized;
    } else if (kind != "unnormalized") {
      fail(c.field("kind"), "expected unnormalized or normalized");
    }
    const bool has_rel = c.has("relative_tolerance");
    const bool has_abs = c.has("absolute_tolerance");
    require(has_rel != has_abs, c.field("tolerance"), "give exactly one of relative_tolerance, absolute_tolerance");
    ac.relative = has_rel;
    ac.tolerance = has_rel ? c.get<double>("relative_tolerance") : c.get<double>("absolute_tolerance");
    require(ac.tolerance > 0.0, c.field("tolerance"), "must be positive");
    ac.min_remainder_exponent = c.maybe<double>("min_remainder_exponent");
    c.finish();
    a.cases.push_back(std::move(ac));
  }
  f.finish();
  return a;
}

McFddConfig parse_mc_fdd(Fields f, const ExperimentConfig& cfg) {
  McFddConfig m;
  const ManifoldSpec& spec = cfg.manifold.spec;
  m.n_steps = f.get<int>("n_steps");
  require(m.n_steps >= 1, f.field("n_steps"), "must be at least 1");
  m.start_node = f.get<std::int64_t>("start_node");
  require(m.start_node >= 0, f.field("start_node"), "must be a node index");
  m.times = f.get<std::vector<double>>("times");
  require(!m.times.empty() && m.times.size() <= 3 && strictly_ascending(m.times), f.field("times"),
          "need 1 to 3 strictly increasing times");
  m.functions = f.get<std::vector<std::string>>("functions");
  require(m.functions.size() == m.times.size(), f.field("functions"), "need one function per time");
  for (std::size_t i = 0; i < m.functions.size(); ++i) {
    check_function(m.functions[i], spec, f.field("functions") + "[" + std::to_string(i) + "]");
  }
  m.paths = f.get<std::int64_t>("paths");
  require(m.paths >= 10000, f.field("paths"), "need at least 1e4 paths");
  m.seed_count = f.get_or<int>("seed_count", 1);
  require(m.seed_count >= 1, f.field("seed_count"), "must be at least 1");
  m.max_z = f.get_or<double>("max_z", 3.0);
  m.min_passing_seeds = f.get_or<int>("min_passing_seeds", m.seed_count);
  require(m.min_passing_seeds >= 0 && m.min_passing_seeds <= m.seed_count, f.field("min_passing_seeds"),
          "must lie in [0, seed_count]");
  if (f.has("gap_study")) {
    Fields g(f.at("gap_study"), f.field("gap_study"));
    GapStudyConfig gs;
    gs.n_list = g.get<std::vector<int>>("n_list");
    require(gs.n_list.size() >= 2 && gs.n_list.front() >= 1 && strictly_ascending(as_doubles(gs.n_list)),
            g.field("n_list"), "need at least 2 positive, strictly ascending entries");
    gs.require_decreasing = g.get_or<bool>("require_decreasing", true);
    g.finish();
    require(cfg.scaling.is_scalar(), f.field("gap_study"), "the diffusion reference needs a scalar scaling");
    m.gap_study = gs;
  }
  f.finish();
  return m;
}

DensityConfig parse_density(Fields f, const ManifoldSpec& spec) {
  DensityConfig d;
  require(spec.kind == ManifoldKind::circle, "manifold.kind", "density checks run on the circle");
  if (f.has("off_partition")) {
    Fields o(f.at("off_partition"), f.field("off_partition"));
    OffPartitionConfig c;
    c.r = o.get<double>("r");
    c.tau = o.get<double>("tau");
    c.t_i = o.get<double>("t_i");
    require(c.r < c.tau && c.tau < c.t_i, o.field("tau"), "need r < tau < t_i");
    c.point = parse_point(o, "point", spec);
    c.points_per_axis = o.get_or<int>("points_per_axis", 161);
    require(c.points_per_axis >= 3, o.field("points_per_axis"), "must be at least 3");
    c.widths = o.get_or<double>("widths", 6.0);
    require(c.widths > 0.0, o.field("widths"), "must be positive");
    c.tolerance = o.get_or<double>("tolerance", 1e-3);
    o.finish();
    d.off_partition = c;
  }
  if (f.has("shell")) {
    Fields s(f.at("shell"), f.field("shell"));
    ShellConfig c;
    c.s = s.get<double>("s");
    c.t = s.get<double>("t");
    require(c.s < c.t, s.field("t"), "need s < t");
    c.point = parse_point(s, "point", spec);
    c.function = s.get<std::string>("function");
    check_function(c.function, spec, s.field("function"));
    c.epsilons = s.get<std::vector<double>>("epsilons");
    require(!c.epsilons.empty() && c.epsilons.back() > 0.0 && strictly_descending(c.epsilons), s.field("epsilons"),
            "need positive, strictly decreasing widths");
    c.radial_nodes = s.get_or<int>("radial_nodes", 64);
    require(c.radial_nodes >= 2, s.field("radial_nodes"), "must be at least 2");
    c.final_tolerance = s.get_or<double>("final_tolerance", 1e-3);
    c.require_monotone = s.get_or<bool>("require_monotone", true);
    s.finish();
    d.shell = c;
  }
  require(d.off_partition || d.shell, f.field(""), "needs off_partition or shell");
  f.finish();
  return d;
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  ExperimentConfig cfg;
  cfg.echo = j;
  Fields f(j, "");
  cfg.schema_version = f.get<int>("schema_version");
  require(cfg.schema_version == kSchemaVersion, "schema_version",
          "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  cfg.experiment = f.get<std::string>("experiment");
  static const std::set<std::string> known = {"converge", "asymptotics", "mc-fdd", "density-check"};
  require(known.count(cfg.experiment) > 0, "experiment", "expected converge, asymptotics, mc-fdd or density-check");
  cfg.name = f.get<std::string>("name");
  require(!cfg.name.empty(), "name", "must not be empty");
  cfg.manifold = parse_manifold(Fields(f.at("manifold"), "manifold"));
  cfg.scaling = f.has("scaling") ? parse_scaling(Fields(f.at("scaling"), "scaling")) : TimeScaling::identity();
  if (!cfg.scaling.is_scalar()) {
    require(static_cast<int>(cfg.scaling.axes().size()) == cfg.manifold.spec.ambient_dim(), "scaling.axes",
            "need one axis per ambient dimension");
  }
  if (f.has("interval")) {
    const auto iv = f.get<std::vector<double>>("interval");
    require(iv.size() == 2 && iv[0] < iv[1], "interval", "expected [S, T] with S < T");
    cfg.interval = std::make_pair(iv[0], iv[1]);
    try {
      cfg.scaling.check_nondegenerate(iv[0], iv[1], cfg.manifold.spec.ambient_dim());
    } catch (const Error& e) {
      fail("scaling", e.what());
    }
  }
  cfg.seed = f.get_or<std::uint64_t>("seed", 0);

  const bool needs_interval = cfg.experiment == "converge" || cfg.experiment == "mc-fdd";
  require(!needs_interval || cfg.interval.has_value(), "interval", "missing field");
  auto block = [&](const char* key) {
    for (const char* other : {"converge", "asymptotics", "mc_fdd", "density_check"}) {
      if (std::string(other) != key && f.has(other)) fail(other, "block does not match the experiment");
    }
    return Fields(f.at(key), key);
  };
  if (cfg.experiment == "converge") {
    cfg.converge = parse_converge(block("converge"), cfg);
  } else if (cfg.experiment == "asymptotics") {
    cfg.asymptotics = parse_asymptotics(block("asymptotics"), cfg.manifold.spec);
  } else if (cfg.experiment == "mc-fdd") {
    cfg.mc_fdd = parse_mc_fdd(block("mc_fdd"), cfg);
  } else {
    cfg.density = parse_density(block("density_check"), cfg.manifold.spec);
  }
  f.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace chernoff::experiments

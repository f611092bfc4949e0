#include <chrono>
#include <cmath>
#include <ctime>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <numbers>

#include "chernoff/conditioned.hpp"
#include "chernoff/engine.hpp"
#include "chernoff/experiments.hpp"
#include "chernoff/manifold.hpp"
#include "chernoff/parallel.hpp"
#include "chernoff/spectral_reference.hpp"
#include "chernoff/test_functions.hpp"

namespace chernoff::experiments {

namespace {

namespace fs = std::filesystem;

// Non-finite doubles have no JSON number form; they are written as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

class Checks {
 public:
  void add(const std::string& name, double value, const char* relation, double threshold, bool passed) {
    list_.push_back({{"name", name}, {"value", number(value)}, {"relation", relation},
                     {"threshold", number(threshold)}, {"passed", passed}});
    all_ = all_ && passed;
  }
  void flag(const std::string& name, bool passed) {
    list_.push_back({{"name", name}, {"passed", passed}});
    all_ = all_ && passed;
  }
  const Json& json() const { return list_; }
  bool all() const { return all_; }

 private:
  Json list_ = Json::array();
  bool all_ = true;
};

struct Context {
  const ExperimentConfig& config;
  fs::path out_dir;
  std::uint64_t seed;
  Checks checks;
  Json summary = Json::object();
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& contents) {
    write_file_atomic(out_dir / name, contents);
    files.push_back(name);
  }
};

bool decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

// Deterministic sample points on M for the drift check.
Eigen::MatrixXd sample_points(const ManifoldSpec& spec, int count) {
  Eigen::MatrixXd pts(spec.ambient_dim(), count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    if (spec.kind == ManifoldKind::circle) {
      pts.col(k) = circle_point(spec.radius, 2.0 * std::numbers::pi * k / count);
    } else {
      const double z = 1.0 - (2.0 * k + 1.0) / count;
      pts.col(k) = sphere_point(spec.radius, std::acos(z), std::remainder(golden * k, 2.0 * std::numbers::pi));
    }
  }
  return pts;
}

void run_study(Context& ctx, const QuadratureGrid& grid, const StudyConfig& sc) {
  const auto [S, T] = *ctx.config.interval;
  const TestFunction f = TestFunction::parse(sc.function);
  const GridFunction values = f.on_grid(grid);
  const ConvergenceTable table = [&] {
    if (sc.self_reference) return self_convergence_study(grid, ctx.config.scaling, S, T, values, sc.n_list);
    const ScalarGeneratorModel model(ctx.config.scaling);
    const GridFunction reference = synthesize(propagate(model, S, T, f.to_spectral(grid)), grid);
    return convergence_study(grid, ctx.config.scaling, S, T, values, sc.n_list, reference);
  }();

  CsvWriter csv({"n", "mesh", "sup_error"});
  Json rows = Json::array();
  std::vector<double> errors;
  for (const auto& r : table.rows) {
    csv.row().cell(r.n).cell(r.mesh).cell(r.sup_error);
    rows.push_back({{"n", r.n}, {"mesh", r.mesh}, {"sup_error", r.sup_error}});
    errors.push_back(r.sup_error);
  }
  ctx.write("study.csv", csv.str());

  Json s = {{"function", sc.function}, {"reference", sc.self_reference ? "self" : "spectral"}, {"rows", rows}};
  if (table.fit) {
    s["order"] = table.fit->exponent;
    s["order_half_width_95"] = number(table.fit->exponent_half_width);
    s["log_constant"] = table.fit->log_constant;
    s["log_residuals"] = table.fit->residuals;
  } else {
    s["order"] = nullptr;
  }
  ctx.summary["study"] = s;

  if (sc.max_final_error) {
    const double e = table.rows.back().sup_error;
    ctx.checks.add("study.final_error", e, "<=", *sc.max_final_error, e <= *sc.max_final_error);
  }
  if (sc.require_decreasing) ctx.checks.flag("study.strictly_decreasing", decreasing(errors));
  if (sc.min_order) {
    const double p = table.fit ? table.fit->exponent : std::numeric_limits<double>::quiet_NaN();
    ctx.checks.add("study.order", p, ">=", *sc.min_order, table.fit && p >= *sc.min_order);
  }
}

void run_generator(Context& ctx, const QuadratureGrid& grid, const GeneratorConfig& gc) {
  CsvWriter csv({"function", "t", "h", "defect"});
  Json cases = Json::array();
  for (const auto& id : gc.functions) {
    const SpectralFunction f = TestFunction::parse(id).to_spectral(grid);
    for (double t : gc.times) {
      const GeneratorConsistency g = generator_consistency_check(grid, ctx.config.scaling, t, f, gc.h_list);
      Json rows = Json::array();
      double worst = 0.0;
      for (const auto& r : g.rows) {
        csv.row().cell(id).cell(t).cell(r.h).cell(r.defect);
        rows.push_back({{"h", r.h}, {"defect", r.defect}});
        worst = std::max(worst, r.defect);
      }
      const std::string label = fmt::format("generator.{}@t={}", id, format_double(t));
      Json c = {{"function", id}, {"t", t}, {"rows", rows}};
      if (g.fit) {
        c["exponent"] = g.fit->exponent;
        c["exponent_half_width_95"] = number(g.fit->exponent_half_width);
        if (gc.require_decreasing) ctx.checks.flag(label + ".decreasing", g.decreasing());
        ctx.checks.add(label + ".exponent", g.fit->exponent, ">=", gc.min_exponent, g.fit->exponent >= gc.min_exponent);
      } else {
        // A zero defect somewhere: only the constant-function case gets here.
        c["exponent"] = nullptr;
        ctx.checks.add(label + ".max_defect", worst, "<=", 1e-12, worst <= 1e-12);
      }
      cases.push_back(c);
    }
  }
  ctx.write("generator_consistency.csv", csv.str());
  ctx.summary["generator_consistency"] = cases;
}

void run_invariants(Context& ctx, const QuadratureGrid& grid, const InvariantsConfig& ic) {
  const auto [S, T] = *ctx.config.interval;
  const TimeScaling& scaling = ctx.config.scaling;
  const ManifoldSpec& spec = grid.spec();
  const Partition partition = uniform_partition(S, T, ic.steps);
  const auto& times = partition.times();
  const Eigen::Index n = grid.size();
  const bool circulant_applies = spec.kind == ManifoldKind::circle && scaling.is_scalar();

  double row_sum = 0.0;
  double min_entry = std::numeric_limits<double>::infinity();
  double circulant = 0.0;
  for (int j = 0; j < partition.steps(); ++j) {
    const KernelOperator q = assemble_step_operator(grid, scaling, times[j], times[j + 1]);
    const RowMatrix& k = q.matrix();
    row_sum = std::max(row_sum, (k.rowwise().sum().array() - 1.0).abs().maxCoeff());
    min_entry = std::min(min_entry, k.minCoeff());
    if (circulant_applies) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < n; ++c) {
          circulant = std::max(circulant, std::abs(k(i, c) - k(0, (c - i + n) % n)));
        }
      }
    }
  }
  const GridFunction ones = GridFunction::Ones(n);
  const double constants = (apply_product(grid, scaling, partition, ones).array() - 1.0).abs().maxCoeff();
  const GridFunction probe =
      TestFunction::parse(spec.kind == ManifoldKind::circle ? "cos:1" : "Y:1:0").on_grid(grid);
  const double contraction =
      apply_product(grid, scaling, partition, probe).cwiseAbs().maxCoeff() - probe.cwiseAbs().maxCoeff();

  Json s = {{"steps", ic.steps},
            {"max_row_sum_deviation", row_sum},
            {"min_entry", min_entry},
            {"constant_preservation", constants},
            {"contraction_excess", contraction}};
  ctx.checks.add("invariants.row_sums", row_sum, "<=", ic.tolerance, row_sum <= ic.tolerance);
  ctx.checks.add("invariants.positivity", min_entry, ">", 0.0, min_entry > 0.0);
  ctx.checks.add("invariants.constants", constants, "<=", ic.tolerance, constants <= ic.tolerance);
  ctx.checks.add("invariants.contraction", contraction, "<=", 0.0, contraction <= 0.0);
  if (circulant_applies) {
    s["circulant_deviation"] = circulant;
    ctx.checks.add("invariants.circulant", circulant, "<=", ic.tolerance, circulant <= ic.tolerance);
  }
  if (scaling.is_scalar()) {
    const ScalarGeneratorModel model(scaling);
    SpectralFunction f = SpectralFunction::zero(spec, std::min(8, EigenBasis::default_max_degree(grid)));
    f.coefficients.setOnes();
    double law = 0.0;
    for (double frac : {0.0, 0.3, 0.5, 0.7, 1.0}) {
      law = std::max(law, propagator_law_check(model, S, S + frac * (T - S), T, f));
    }
    const Eigen::MatrixXd pts = sample_points(spec, ic.drift_samples);
    double drift = 0.0;
    double speed = 0.0;
    for (double t : times) {
      drift = std::max(drift, drift_vanishes(spec, scaling, t, pts));
      speed = std::max(speed, std::abs(scaling.diag_derivative(t, spec.ambient_dim())[0]) * spec.radius);
    }
    const double drift_bound = ic.tolerance * std::max(1.0, speed);
    s["propagator_law_deviation"] = law;
    s["drift_projection"] = drift;
    ctx.checks.add("invariants.propagator_law", law, "<=", ic.tolerance, law <= ic.tolerance);
    ctx.checks.add("invariants.drift", drift, "<=", drift_bound, drift <= drift_bound);
  }
  ctx.summary["invariants"] = s;
}

void cmd_converge(Context& ctx) {
  const ConvergeConfig& c = *ctx.config.converge;
  const QuadratureGrid grid = build_grid(ctx.config.manifold.spec, ctx.config.manifold.resolution);
  if (c.study) run_study(ctx, grid, *c.study);
  if (c.generator) run_generator(ctx, grid, *c.generator);
  if (c.invariants) run_invariants(ctx, grid, *c.invariants);
}

void cmd_asymptotics(Context& ctx) {
  const AsymptoticsConfig& a = *ctx.config.asymptotics;
  const QuadratureGrid grid = build_grid(ctx.config.manifold.spec, ctx.config.manifold.resolution);
  CsvWriter csv({"case", "t", "value", "fitted_model"});
  Json cases = Json::array();
  for (const AsymptoticCase& c : a.cases) {
    const TestFunction g = TestFunction::parse(c.function);
    const GridFunction values = g.on_grid(grid);
    const SpectralFunction spectral = g.to_spectral(grid);
    const bool normalized = c.source == ExpansionSource::normalized;
    const ExpansionPrediction pred =
        normalized ? predict_normalized(spectral, c.point) : predict_unnormalized(spectral, c.point);
    const ExpansionFit fit = normalized ? measure_normalized(grid, values, c.point, a.t_samples)
                                        : measure_unnormalized(grid, values, c.point, a.t_samples);
    for (std::size_t i = 0; i < fit.t_samples.size(); ++i) {
      const double t = fit.t_samples[i];
      csv.row().cell(c.label).cell(t).cell(fit.values[i]).cell(fit.a0 + fit.a1 * t + fit.b * t * std::sqrt(t));
    }
    const double diff = std::abs(fit.a1 - pred.a1);
    const double allowed = c.relative ? c.tolerance * std::abs(pred.a1) : c.tolerance;
    const double t0 = tail_threshold_time(grid, c.point, a.t_samples);
    cases.push_back({{"label", c.label},
                     {"function", c.function},
                     {"kind", normalized ? "normalized" : "unnormalized"},
                     {"point", std::vector<double>(c.point.data(), c.point.data() + c.point.size())},
                     {"predicted_a0", pred.a0},
                     {"predicted_a1", pred.a1},
                     {"fitted_a0", fit.a0},
                     {"fitted_a1", fit.a1},
                     {"fitted_b", fit.b},
                     {"a1_abs_diff", diff},
                     {"a1_rel_diff", number(diff / std::abs(pred.a1))},
                     {"remainder_exponent", number(fit.remainder_exponent)},
                     {"remainder_constant", fit.remainder_constant},
                     {"residual_norm", fit.residual_norm},
                     {"condition", fit.condition},
                     {"t_window", {fit.t_min, fit.t_max}},
                     {"tail_t0", t0}});
    ctx.checks.add(c.label + ".a1", diff, "<=", allowed, diff <= allowed);
    if (c.min_remainder_exponent) {
      ctx.checks.add(c.label + ".remainder_exponent", fit.remainder_exponent, ">=", *c.min_remainder_exponent,
                     remainder_exponent_check(fit, *c.min_remainder_exponent));
    }
  }
  ctx.write("asymptotics_samples.csv", csv.str());
  ctx.summary["cases"] = cases;
}

std::vector<TestFunction> parse_factors(const std::vector<std::string>& ids) {
  std::vector<TestFunction> out;
  for (const auto& id : ids) out.push_back(TestFunction::parse(id));
  return out;
}

void cmd_mc_fdd(Context& ctx) {
  const McFddConfig& m = *ctx.config.mc_fdd;
  const auto [S, T] = *ctx.config.interval;
  const QuadratureGrid grid = build_grid(ctx.config.manifold.spec, ctx.config.manifold.resolution);
  if (m.start_node >= grid.size()) throw Error(ErrorCode::InvalidConfig, "mc_fdd.start_node: outside the grid");
  const std::vector<TestFunction> factors = parse_factors(m.functions);
  const Partition partition = uniform_partition(S, T, m.n_steps);

  CsvWriter csv({"seed", "paths", "mc_mean", "mc_stderr", "reference_chain", "reference_diffusion", "z_score"});
  Json seeds = Json::array();
  int passing = 0;
  bool within_gap = true;
  FddReport first;
  for (int i = 0; i < m.seed_count; ++i) {
    const std::uint64_t seed = ctx.seed + static_cast<std::uint64_t>(i);
    const FddReport r = fdd_estimate(grid, ctx.config.scaling, partition, m.start_node, m.times, factors, m.paths, seed);
    if (i == 0) first = r;
    csv.row().cell(seed).cell(r.paths).cell(r.mc_mean).cell(r.mc_stderr).cell(r.reference_chain)
        .cell(r.reference_diffusion).cell(r.z_score);
    seeds.push_back({{"seed", seed}, {"mc_mean", r.mc_mean}, {"mc_stderr", r.mc_stderr}, {"z_score", number(r.z_score)}});
    if (r.z_score <= m.max_z) ++passing;
    if (std::isfinite(r.reference_diffusion)) {
      const double bound = std::abs(r.reference_chain - r.reference_diffusion) + 3.0 * r.mc_stderr;
      within_gap = within_gap && std::abs(r.mc_mean - r.reference_diffusion) <= bound;
    }
  }
  ctx.write("fdd_seeds.csv", csv.str());
  ctx.summary["times"] = m.times;
  ctx.summary["function_id"] = first.function_id;
  ctx.summary["paths"] = m.paths;
  ctx.summary["reference_chain"] = first.reference_chain;
  ctx.summary["reference_diffusion"] = number(first.reference_diffusion);
  ctx.summary["seeds"] = seeds;
  ctx.summary["passing_seeds"] = passing;
  ctx.checks.add("mc_fdd.passing_seeds", passing, ">=", m.min_passing_seeds, passing >= m.min_passing_seeds);
  if (ctx.config.scaling.is_scalar()) ctx.checks.flag("mc_fdd.diffusion_gap_bound", within_gap);

  if (m.gap_study) {
    CsvWriter gcsv({"n", "reference_chain", "reference_diffusion", "gap"});
    Json rows = Json::array();
    std::vector<double> gaps;
    for (int n : m.gap_study->n_list) {
      const Partition p = uniform_partition(S, T, n);
      const double a = fdd_reference_chain(grid, ctx.config.scaling, p, m.start_node, m.times, factors);
      const double b = fdd_reference_diffusion(grid, ctx.config.scaling, p, m.start_node, m.times, factors);
      gcsv.row().cell(n).cell(a).cell(b).cell(std::abs(a - b));
      rows.push_back({{"n", n}, {"reference_chain", a}, {"reference_diffusion", b}, {"gap", std::abs(a - b)}});
      gaps.push_back(std::abs(a - b));
    }
    ctx.write("gap_study.csv", gcsv.str());
    ctx.summary["gap_study"] = rows;
    if (m.gap_study->require_decreasing) ctx.checks.flag("mc_fdd.gap_decreasing", decreasing(gaps));
  }
}

void cmd_density_check(Context& ctx) {
  const DensityConfig& d = *ctx.config.density;
  const QuadratureGrid grid = build_grid(ctx.config.manifold.spec, ctx.config.manifold.resolution);
  if (d.off_partition) {
    const OffPartitionConfig& o = *d.off_partition;
    const double mass =
        off_partition_mass(grid, ctx.config.scaling, o.r, o.point, o.tau, o.t_i, o.points_per_axis, o.widths);
    CsvWriter csv({"r", "tau", "t_i", "points_per_axis", "widths", "mass"});
    csv.row().cell(o.r).cell(o.tau).cell(o.t_i).cell(o.points_per_axis).cell(o.widths).cell(mass);
    ctx.write("off_partition.csv", csv.str());
    ctx.summary["off_partition_mass"] = mass;
    const double dev = std::abs(mass - 1.0);
    ctx.checks.add("density.off_partition_normalization", dev, "<=", o.tolerance, dev <= o.tolerance);
  }
  if (d.shell) {
    const ShellConfig& s = *d.shell;
    const GridFunction f = TestFunction::parse(s.function).on_grid(grid);
    const auto rows = shell_density_limit(grid, ctx.config.scaling, s.s, s.point, s.t, s.epsilons, f, s.radial_nodes);
    CsvWriter csv({"epsilon", "shell", "limit", "deviation"});
    Json jrows = Json::array();
    std::vector<double> devs;
    for (const auto& r : rows) {
      csv.row().cell(r.epsilon).cell(r.shell).cell(r.limit).cell(r.deviation);
      jrows.push_back({{"epsilon", r.epsilon}, {"shell", r.shell}, {"limit", r.limit}, {"deviation", r.deviation}});
      devs.push_back(r.deviation);
    }
    ctx.write("shell.csv", csv.str());
    ctx.summary["shell"] = jrows;
    if (s.require_monotone) ctx.checks.flag("density.shell_monotone", decreasing(devs));
    ctx.checks.add("density.shell_final_deviation", devs.back(), "<=", s.final_tolerance,
                   devs.back() <= s.final_tolerance);
  }
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const std::string started = utc_now();
  set_thread_count(options.threads);
  Context ctx{config, options.out_dir, options.seed.value_or(config.seed), {}, {}, {}};
  fs::create_directories(ctx.out_dir);

  RunOutcome outcome;
  try {
    if (config.experiment == "converge") {
      cmd_converge(ctx);
    } else if (config.experiment == "asymptotics") {
      cmd_asymptotics(ctx);
    } else if (config.experiment == "mc-fdd") {
      cmd_mc_fdd(ctx);
    } else {
      cmd_density_check(ctx);
    }
    outcome.passed = ctx.checks.all();
    outcome.exit_code = outcome.passed ? kExitOk : kExitAssertion;
  } catch (const Error& e) {
    outcome.exit_code = exit_code_for(e.code());
    outcome.error = e.what();
  }

  Json summary = {{"name", config.name},
                  {"experiment", config.experiment},
                  {"seed", ctx.seed},
                  {"passed", outcome.passed},
                  {"checks", ctx.checks.json()}};
  for (auto it = ctx.summary.begin(); it != ctx.summary.end(); ++it) summary[it.key()] = it.value();
  if (!outcome.error.empty()) summary["error"] = outcome.error;
  ctx.write("summary.json", summary.dump(2) + "\n");

  Json manifest = {{"tool", "chernoff"},
                   {"version", kToolVersion},
                   {"name", config.name},
                   {"experiment", config.experiment},
                   {"config", config.echo},
                   {"seed", ctx.seed},
                   {"threads", options.threads},
                   {"started_at", started},
                   {"finished_at", utc_now()},
                   {"outputs", ctx.files},
                   {"passed", outcome.passed},
                   {"exit_code", outcome.exit_code}};
  if (!outcome.error.empty()) manifest["error"] = outcome.error;
  write_json(ctx.out_dir / "manifest.json", manifest);

  outcome.summary = std::move(summary);
  outcome.files = std::move(ctx.files);
  outcome.files.push_back("manifest.json");
  return outcome;
}

RunOutcome run_config_file(std::string_view command, const fs::path& config_path, const RunOptions& options) {
  try {
    const ExperimentConfig config = load_config(config_path);
    if (config.experiment != command) {
      throw Error(ErrorCode::InvalidConfig, "experiment: config is for '" + config.experiment + "', not '" +
                                                std::string(command) + "'");
    }
    return run_experiment(config, options);
  } catch (const Error& e) {
    RunOutcome outcome;
    outcome.exit_code = exit_code_for(e.code());
    outcome.error = e.what();
    return outcome;
  }
}

}  // namespace chernoff::experiments

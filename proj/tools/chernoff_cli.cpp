#include <CLI11.hpp>
#include <iostream>
#include <utility>

#include "chernoff/experiments.hpp"

namespace ex = chernoff::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Chernoff-product approximation of diffusions on the circle and the sphere"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string presets;
  double s = 0.0;
  double t = 0.0;
  std::string file;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Output directory (default: $CHERNOFF_OUT or ./chernoff_out)");
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  std::vector<CLI::App*> experiments;
  const std::pair<const char*, const char*> kinds[] = {
      {"converge", "Product convergence, generator consistency and invariants"},
      {"asymptotics", "Short-time expansion coefficients of Gaussian integrals"},
      {"mc-fdd", "Monte Carlo finite-dimensional distributions of the conditioned chain"},
      {"density-check", "Off-partition density normalization and shell limits"},
  };
  for (const auto& [name, description] : kinds) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    common(sub);
    experiments.push_back(sub);
  }
  CLI::App* all = app.add_subcommand("run-all-presets", "Run every shipped preset");
  all->add_option("--presets", presets, "Preset directory");
  common(all);

  CLI::App* grid = app.add_subcommand("dump-grid", "Write the quadrature grid of a config as CSV");
  grid->add_option("--config", config)->required()->check(CLI::ExistingFile);
  grid->add_option("--file", file, "Output CSV")->required();
  CLI::App* kernel = app.add_subcommand("dump-kernel", "Write the step operator Q_{s,t} of a config as CSV");
  kernel->add_option("--config", config)->required()->check(CLI::ExistingFile);
  kernel->add_option("--s", s)->required();
  kernel->add_option("--t", t)->required();
  kernel->add_option("--file", file, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ex::kExitConfig;
  }

  ex::RunOptions options;
  options.out_dir = out.empty() ? ex::default_output_dir() : std::filesystem::path(out);
  options.threads = threads;
  for (CLI::App* sub : {experiments[0], experiments[1], experiments[2], experiments[3], all}) {
    if (sub->count("--seed") > 0) options.seed = seed;
  }

  try {
    for (CLI::App* sub : experiments) {
      if (!sub->parsed()) continue;
      const ex::RunOutcome r = ex::run_config_file(sub->get_name(), config, options);
      if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
      std::cout << (r.exit_code == ex::kExitOk ? "PASS" : "FAIL") << " " << sub->get_name() << " -> "
                << options.out_dir.string() << " (exit " << r.exit_code << ")\n";
      return r.exit_code;
    }
    if (all->parsed()) {
      const auto dir = presets.empty() ? ex::default_preset_dir() : std::filesystem::path(presets);
      return ex::run_all_presets(dir, options, std::cout);
    }
    const ex::ExperimentConfig cfg = ex::load_config(config);
    if (grid->parsed()) ex::dump_grid(cfg.manifold, file);
    if (kernel->parsed()) ex::dump_kernel(cfg, s, t, file);
    return ex::kExitOk;
  } catch (const chernoff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kExitConfig;
  }
}

#include <algorithm>
#include <ostream>

#include "chernoff/experiments.hpp"
#include "chernoff/kernel.hpp"

namespace chernoff::experiments {

namespace fs = std::filesystem;

int run_all_presets(const fs::path& preset_dir, const RunOptions& options, std::ostream& log) {
  std::vector<fs::path> presets;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(preset_dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") presets.push_back(entry.path());
  }
  if (ec || presets.empty()) {
    log << "no presets found in " << preset_dir.string() << "\n";
    return kExitConfig;
  }
  std::sort(presets.begin(), presets.end());

  int worst = kExitOk;
  Json runs = Json::array();
  for (const fs::path& preset : presets) {
    RunOptions sub = options;
    sub.out_dir = options.out_dir / preset.stem();
    RunOutcome outcome;
    try {
      const ExperimentConfig config = load_config(preset);
      outcome = run_experiment(config, sub);
    } catch (const Error& e) {
      outcome.exit_code = exit_code_for(e.code());
      outcome.error = e.what();
    }
    worst = std::max(worst, outcome.exit_code);
    log << (outcome.exit_code == kExitOk ? "PASS " : "FAIL ") << preset.stem().string() << " (exit "
        << outcome.exit_code << ")";
    if (!outcome.error.empty()) log << ": " << outcome.error;
    log << "\n";
    Json run = {{"preset", preset.filename().string()}, {"exit_code", outcome.exit_code}, {"passed", outcome.passed}};
    if (!outcome.error.empty()) run["error"] = outcome.error;
    Json outputs = Json::array();
    for (const auto& f : outcome.files) outputs.push_back((fs::path(preset.stem()) / f).generic_string());
    run["outputs"] = outputs;
    runs.push_back(run);
  }
  write_json(options.out_dir / "manifest.json", {{"tool", "chernoff"},
                                                 {"version", kToolVersion},
                                                 {"command", "run-all-presets"},
                                                 {"seed", options.seed ? Json(*options.seed) : Json(nullptr)},
                                                 {"threads", options.threads},
                                                 {"runs", runs},
                                                 {"exit_code", worst}});
  return worst;
}

void dump_grid(const ManifoldConfig& manifold, const fs::path& file) {
  const QuadratureGrid grid = build_grid(manifold.spec, manifold.resolution);
  const bool sphere = manifold.spec.kind == ManifoldKind::sphere;
  std::vector<std::string> header = {"index", "x", "y"};
  if (sphere) header.push_back("z");
  header.push_back("weight");
  CsvWriter csv(header);
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    csv.row().cell(static_cast<std::int64_t>(j));
    for (Eigen::Index k = 0; k < grid.nodes().rows(); ++k) csv.cell(grid.nodes()(k, j));
    csv.cell(grid.weights()[j]);
  }
  write_file_atomic(file, csv.str());
}

void dump_kernel(const ExperimentConfig& config, double s, double t, const fs::path& file) {
  const QuadratureGrid grid = build_grid(config.manifold.spec, config.manifold.resolution);
  const KernelOperator q = assemble_step_operator(grid, config.scaling, s, t);
  std::vector<std::string> header = {"row"};
  for (Eigen::Index j = 0; j < q.size(); ++j) header.push_back("k" + std::to_string(j));
  CsvWriter csv(header);
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    csv.row().cell(static_cast<std::int64_t>(i));
    for (Eigen::Index j = 0; j < q.size(); ++j) csv.cell(q.matrix()(i, j));
  }
  write_file_atomic(file, csv.str());
}

}  // namespace chernoff::experiments

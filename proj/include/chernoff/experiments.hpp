#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chernoff/asymptotics.hpp"
#include "chernoff/error.hpp"
#include "chernoff/quadrature.hpp"
#include "chernoff/scaling.hpp"

namespace chernoff::experiments {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitAssertion = 4;

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

struct ManifoldConfig {
  ManifoldSpec spec;
  GridResolution resolution;
};

struct StudyConfig {
  std::string function;
  std::vector<int> n_list;
  bool self_reference = false;
  std::optional<double> max_final_error;
  std::optional<double> min_order;
  bool require_decreasing = true;
};

struct GeneratorConfig {
  std::vector<std::string> functions;
  std::vector<double> times;
  std::vector<double> h_list;
  double min_exponent = 0.4;
  bool require_decreasing = true;
};

struct InvariantsConfig {
  int steps = 16;
  double tolerance = 1e-12;
  int drift_samples = 64;
};

struct ConvergeConfig {
  std::optional<StudyConfig> study;
  std::optional<GeneratorConfig> generator;
  std::optional<InvariantsConfig> invariants;
};

struct AsymptoticCase {
  std::string label;
  std::string function;
  Eigen::VectorXd point;
  ExpansionSource source = ExpansionSource::unnormalized;
  /// Allowed |fitted a1 - predicted a1|: relative to |predicted a1| when
  /// relative, otherwise absolute.
  double tolerance = 0.05;
  bool relative = true;
  std::optional<double> min_remainder_exponent;
};

struct AsymptoticsConfig {
  std::vector<double> t_samples;
  std::vector<AsymptoticCase> cases;
};

struct GapStudyConfig {
  std::vector<int> n_list;
  bool require_decreasing = true;
};

struct McFddConfig {
  int n_steps = 0;
  Eigen::Index start_node = 0;
  std::vector<double> times;
  std::vector<std::string> functions;
  std::int64_t paths = 0;
  int seed_count = 1;
  double max_z = 3.0;
  int min_passing_seeds = 1;
  std::optional<GapStudyConfig> gap_study;
};

struct OffPartitionConfig {
  double r = 0.0;
  double tau = 0.0;
  double t_i = 0.0;
  Eigen::VectorXd point;
  int points_per_axis = 161;
  double widths = 6.0;
  double tolerance = 1e-3;
};

struct ShellConfig {
  double s = 0.0;
  double t = 0.0;
  Eigen::VectorXd point;
  std::string function;
  std::vector<double> epsilons;
  int radial_nodes = 64;
  double final_tolerance = 1e-3;
  bool require_monotone = true;
};

struct DensityConfig {
  std::optional<OffPartitionConfig> off_partition;
  std::optional<ShellConfig> shell;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string experiment;  // converge | asymptotics | mc-fdd | density-check
  std::string name;
  ManifoldConfig manifold;
  TimeScaling scaling = TimeScaling::identity();
  std::optional<std::pair<double, double>> interval;
  std::uint64_t seed = 0;
  std::optional<ConvergeConfig> converge;
  std::optional<AsymptoticsConfig> asymptotics;
  std::optional<McFddConfig> mc_fdd;
  std::optional<DensityConfig> density;
  Json echo;  // the config as read
};

/// Strict parser: unknown fields, missing fields, wrong types and violated
/// preconditions throw InvalidConfig naming the offending field.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  int threads = 1;
};

struct RunOutcome {
  int exit_code = kExitOk;
  bool passed = false;
  Json summary;
  std::vector<std::string> files;  // relative to the output directory
  std::string error;
};

/// Runs one experiment, writing its artifacts and manifest.json into
/// options.out_dir. Library errors become exit codes 2 or 3.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// Loads the config, checks that it belongs to `command` and runs it. Config
/// errors (including unreadable files) give exit code 2.
RunOutcome run_config_file(std::string_view command, const std::filesystem::path& config, const RunOptions& options);

/// Runs every presets/*.json in name order into out_dir/<preset stem>/ and
/// writes out_dir/manifest.json. Returns the largest exit code.
int run_all_presets(const std::filesystem::path& preset_dir, const RunOptions& options, std::ostream& log);

/// CHERNOFF_OUT when set, otherwise ./chernoff_out.
std::filesystem::path default_output_dir();
std::filesystem::path default_preset_dir();

/// Node coordinates and weights: index, x, y[, z], weight.
void dump_grid(const ManifoldConfig& manifold, const std::filesystem::path& file);
/// Dense Q_{s,t} as CSV rows.
void dump_kernel(const ExperimentConfig& config, double s, double t, const std::filesystem::path& file);

/// Exit code for a library error code.
int exit_code_for(ErrorCode code);

// Output helpers shared by the commands.

/// RFC 4180 with CRLF line ends; doubles printed with 17 significant digits.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row();
  CsvWriter& cell(double v);
  CsvWriter& cell(std::int64_t v);
  CsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
  CsvWriter& cell(std::uint64_t v);
  CsvWriter& cell(std::string_view v);
  std::string str() const;

 private:
  void separator();
  std::string text_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
  bool open_ = false;
};

std::string format_double(double v);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace chernoff::experiments

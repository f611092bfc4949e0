// Acceptance suite: one PASS/FAIL line per criterion.
//
//   chernoff_acceptance [criterion-id ...]
//
// Without arguments every criterion runs. An id selects itself and its
// sub-criteria ("3" selects 3a, 3b and 3c). Exit status is 0 iff every
// selected criterion passed.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>
#include <sys/wait.h>
#include <unistd.h>

#include "chernoff/experiments.hpp"
#include "chernoff/spectral_reference.hpp"

namespace fs = std::filesystem;
using chernoff::experiments::Json;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  double budget_seconds = 0.0;  // 0: no runtime bound
  std::function<Verdict()> run;
};

int worker_threads() {
  return static_cast<int>(std::max(1u, std::min(4u, std::thread::hardware_concurrency())));
}

fs::path scratch_root() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / ("chernoff_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

// Runs a preset once per process and returns its summary. Exit code 4
// (assertion failure with artifacts) is fine: criteria judge the numbers
// themselves. Codes 2 and 3 mean nothing was measured.
const Json& preset_summary(const std::string& stem) {
  static std::map<std::string, Json> cache;
  if (auto it = cache.find(stem); it != cache.end()) return it->second;
  const fs::path config = chernoff::experiments::default_preset_dir() / (stem + ".json");
  const auto parsed = chernoff::experiments::load_config(config);
  chernoff::experiments::RunOptions options;
  options.out_dir = scratch_root() / stem;
  options.threads = worker_threads();
  const auto outcome = chernoff::experiments::run_experiment(parsed, options);
  if (outcome.exit_code != chernoff::experiments::kExitOk &&
      outcome.exit_code != chernoff::experiments::kExitAssertion) {
    throw std::runtime_error(stem + ": exit " + std::to_string(outcome.exit_code) + " " + outcome.error);
  }
  return cache.emplace(stem, outcome.summary).first->second;
}

double number(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    return NAN;
  }
  return j.get<double>();
}

const Json& find_case(const Json& summary, const std::string& label) {
  for (const auto& c : summary.at("cases")) {
    if (c.at("label") == label) return c;
  }
  throw std::runtime_error("no case " + label);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

std::string list(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ", ") + fmt::format("{:.3g}", x);
  return out;
}

// --- criteria --------------------------------------------------------------

Verdict convergence_cos() {
  const Json& s = preset_summary("chernoff_circle");
  const Json& study = s.at("study");
  std::vector<double> errors;
  std::vector<int> ns;
  for (const auto& row : study.at("rows")) {
    ns.push_back(row.at("n"));
    errors.push_back(row.at("sup_error"));
  }
  const double order = number(study.at("order"));
  const bool ok = ns == std::vector<int>{8, 16, 32, 64, 128} && errors.back() <= 1e-2 &&
                  strictly_decreasing(errors) && order >= 0.5;
  return {ok, fmt::format("sup-error(128) = {:.3e} (<= 1e-2), errors [{}], order {:.3f} +- {:.3f} (>= 0.5)",
                          errors.back(), list(errors), order, number(study.at("order_half_width_95")))};
}

Verdict time_dependent_scaling() {
  const Json& s = preset_summary("affine_scaling_circle");
  const Json& rows = s.at("study").at("rows");
  const Json& last = rows.back();
  const chernoff::ScalarGeneratorModel model(
      chernoff::TimeScaling::scalar(chernoff::ScalarProfile::affine(1.0, 1.0)));
  const double factor = std::exp(-0.5 * model.inverse_square_integral(0.0, 1.0));
  const bool ok = last.at("n") == 128 && number(last.at("sup_error")) <= 1e-2 &&
                  std::abs(factor - 0.7788007831) <= 1e-10;
  return {ok, fmt::format("sup-error(128) = {:.3e} (<= 1e-2) against spectral factor {:.10f}",
                          number(last.at("sup_error")), factor)};
}

Verdict expansion_case(const std::string& preset, const std::string& label, double target) {
  const Json& c = find_case(preset_summary(preset), label);
  const double a1 = number(c.at("fitted_a1"));
  const double q = number(c.at("remainder_exponent"));
  const double rel = std::abs(a1 - target) / std::abs(target);
  const bool ok = rel <= 0.05 && q >= 1.4;
  return {ok, fmt::format("fitted a1 = {:.6g}, target {:.6g}, relative deviation {:.3g} (<= 0.05), remainder "
                          "exponent {:.3g} (>= 1.4)",
                          a1, target, rel, q)};
}

Verdict normalized_ratio() {
  const Json& s = preset_summary("normalized_expansion_circle");
  const double flat = number(find_case(s, "const").at("fitted_a1"));
  const double cos = number(find_case(s, "cos").at("fitted_a1"));
  const double rel = std::abs(cos + 0.5) / 0.5;
  const bool ok = std::abs(flat) <= 1e-3 && rel <= 0.05;
  return {ok, fmt::format("g=1: a1 = {:.3e} (|a1| <= 1e-3); g=cos: a1 = {:.6f}, relative deviation {:.3g} (<= 0.05)",
                          flat, cos, rel)};
}

Verdict invariants() {
  const std::set<std::string> bounded = {"invariants.row_sums", "invariants.constants", "invariants.circulant",
                                         "invariants.propagator_law", "invariants.drift"};
  std::map<std::string, double> worst;
  bool ok = true;
  for (const char* stem : {"invariants_circle", "invariants_circle_affine", "invariants_sphere"}) {
    for (const auto& check : preset_summary(stem).at("checks")) {
      const std::string name = check.at("name");
      if (!bounded.contains(name)) continue;
      const double v = std::abs(number(check.at("value")));
      worst[name] = std::max(worst[name], v);
      ok = ok && v <= 1e-12;
    }
  }
  ok = ok && worst.size() == bounded.size();
  std::string detail;
  for (const auto& [name, v] : worst) detail += fmt::format("{}{} {:.2e}", detail.empty() ? "" : ", ", name.substr(11), v);
  return {ok, detail + " (each <= 1e-12)"};
}

Verdict generator_consistency() {
  const std::vector<double> expected_h{4e-2, 2e-2, 1e-2, 5e-3};
  int tables = 0;
  int good = 0;
  double min_exponent = INFINITY;
  for (const char* stem : {"generator_constant1", "generator_constant2", "generator_affine"}) {
    std::set<std::string> functions;
    std::set<double> times;
    for (const auto& table : preset_summary(stem).at("generator_consistency")) {
      ++tables;
      std::vector<double> h, defect;
      for (const auto& row : table.at("rows")) {
        h.push_back(row.at("h"));
        defect.push_back(row.at("defect"));
      }
      const double p = number(table.at("exponent"));
      min_exponent = std::min(min_exponent, p);
      if (h == expected_h && strictly_decreasing(defect) && p >= 0.4) ++good;
      functions.insert(table.at("function"));
      times.insert(table.at("t").get<double>());
    }
    if (functions != std::set<std::string>{"cos:1", "cos:2"} || times.size() != 3) tables = -1000;
  }
  const bool ok = tables == 18 && good == 18;
  return {ok, fmt::format("{} of 18 (f, c, t) tables decreasing with exponent >= 0.4; smallest exponent {:.3f}", good,
                          min_exponent)};
}

Verdict fdd() {
  const Json& s = preset_summary("fdd_circle");
  int passing = 0;
  int seeds = 0;
  double worst_z = 0.0;
  for (const auto& seed : s.at("seeds")) {
    ++seeds;
    const double z = number(seed.at("z_score"));
    worst_z = std::max(worst_z, z);
    if (z <= 3.0) ++passing;
  }
  std::vector<double> gaps;
  std::vector<int> ns;
  for (const auto& row : s.at("gap_study")) {
    ns.push_back(row.at("n"));
    gaps.push_back(row.at("gap"));
  }
  const bool ok = s.at("paths") == 100000 && seeds == 20 && passing >= 19 &&
                  ns == std::vector<int>{16, 64, 256} && strictly_decreasing(gaps);
  return {ok, fmt::format("{}/{} seeds with z <= 3 (need 19), max z {:.2f}; chain-diffusion gaps [{}] over n = 16, 64, "
                          "256",
                          passing, seeds, worst_z, list(gaps))};
}

Verdict densities() {
  const Json& s = preset_summary("densities_circle");
  const double mass = number(s.at("off_partition_mass"));
  std::vector<double> deviations, eps;
  for (const auto& row : s.at("shell")) {
    eps.push_back(row.at("epsilon"));
    deviations.push_back(row.at("deviation"));
  }
  const bool ok = std::abs(mass - 1.0) <= 1e-3 && strictly_decreasing(deviations) && !eps.empty() &&
                  eps.back() == 0.025 && deviations.back() <= 1e-3;
  return {ok, fmt::format("off-partition mass {:.10f} (1 +- 1e-3); shell deviations [{}] at eps [{}]", mass,
                          list(deviations), list(eps))};
}

// Drops run timestamps, the only fields allowed to differ between runs.
void strip_timestamps(Json& j) {
  if (j.is_object()) {
    j.erase("started_at");
    j.erase("finished_at");
    for (auto& [key, value] : j.items()) strip_timestamps(value);
  } else if (j.is_array()) {
    for (auto& value : j) strip_timestamps(value);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict reproducibility() {
  const fs::path dirs[2] = {scratch_root() / "repro_a", scratch_root() / "repro_b"};
  int codes[2];
  for (int i = 0; i < 2; ++i) {
    const std::string cmd = fmt::format("\"{}\" run-all-presets --seed 42 --threads {} --out \"{}\" > \"{}.log\" 2>&1",
                                        CHERNOFF_CLI_PATH, worker_threads(), dirs[i].string(), dirs[i].string());
    const int status = std::system(cmd.c_str());
    codes[i] = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::set<std::string> files[2];
  for (int i = 0; i < 2; ++i) {
    if (!fs::exists(dirs[i])) return {false, "no output directory"};
    for (const auto& entry : fs::recursive_directory_iterator(dirs[i])) {
      if (entry.is_regular_file()) files[i].insert(fs::relative(entry.path(), dirs[i]).generic_string());
    }
  }
  if (files[0] != files[1]) return {false, "output file lists differ"};
  int identical = 0;
  int manifests = 0;
  std::vector<std::string> differing;
  for (const auto& rel : files[0]) {
    const std::string a = read_file(dirs[0] / rel);
    const std::string b = read_file(dirs[1] / rel);
    if (a == b) {
      ++identical;
      continue;
    }
    if (fs::path(rel).filename() == "manifest.json") {
      Json ja = Json::parse(a), jb = Json::parse(b);
      strip_timestamps(ja);
      strip_timestamps(jb);
      if (ja == jb) {
        ++manifests;
        continue;
      }
    }
    differing.push_back(rel);
  }
  const bool ok = codes[0] == codes[1] && codes[0] >= 0 && differing.empty() && files[0].size() > 10;
  std::string detail = fmt::format("{} files byte-identical, {} manifests identical up to run timestamps, exit codes "
                                   "{} / {}",
                                   identical, manifests, codes[0], codes[1]);
  for (const auto& d : differing) detail += "; differs: " + d;
  return {ok, detail};
}

std::vector<Criterion> criteria() {
  return {
      {"1", "Chernoff convergence, circle, sigma = I, f = cos", 30, convergence_cos},
      {"2", "time-dependent scaling c(t) = 1 + t", 30, time_dependent_scaling},
      {"3a", "unnormalized expansion a1, circle, g = 1", 60,
       [] { return expansion_case("expansion_circle", "const", 0.125); }},
      {"3b", "unnormalized expansion a1, sphere, g = 1", 60,
       [] { return expansion_case("expansion_sphere", "const", 1.0 / 6.0); }},
      {"3c", "unnormalized expansion a1, circle, g = cos", 60,
       [] { return expansion_case("expansion_circle", "cos", -0.375); }},
      {"4", "normalized ratio, curvature cancellation", 30, normalized_ratio},
      {"5", "exact algebraic invariants", 10, invariants},
      {"6", "generator consistency", 60, generator_consistency},
      {"7", "FDD Monte Carlo", 180, fdd},
      {"8", "conditioned densities", 60, densities},
      {"9", "reproducibility of run-all-presets --seed 42", 0, reproducibility},
  };
}

bool selected(const std::string& id, const std::vector<std::string>& filters) {
  if (filters.empty()) return true;
  for (const auto& f : filters) {
    if (id == f || (id.size() > f.size() && id.compare(0, f.size(), f) == 0 && std::isalpha(id[f.size()]))) return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> filters(argv + 1, argv + argc);
  int failures = 0;
  int ran = 0;
  for (const auto& c : criteria()) {
    if (!selected(c.id, filters)) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt::format("{:.1f} s", seconds);
    if (c.budget_seconds > 0) {
      timing += fmt::format(" of {:.0f} s", c.budget_seconds);
      if (seconds > c.budget_seconds) v.passed = false;
    }
    if (!v.passed) ++failures;
    std::cout << fmt::format("{} [{}] {}: {} [{}]", v.passed ? "PASS" : "FAIL", c.id, c.title, v.detail, timing)
              << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no criterion matches the filter\n";
    return 2;
  }
  if (failures > 0) std::cout << "artifacts: " << scratch_root().string() << std::endl;
  // Artifacts of failing runs stay behind for inspection.
  if (failures == 0) fs::remove_all(scratch_root());
  return failures == 0 ? 0 : 1;
}

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "chernoff/eigenbasis.hpp"
#include "chernoff/fit.hpp"
#include "chernoff/kernel.hpp"

namespace chernoff {

/// Strictly increasing times t_0 < ... < t_n with n >= 1.
class Partition {
 public:
  /// Throws InvalidPartition.
  explicit Partition(std::vector<double> times);

  const std::vector<double>& times() const noexcept { return times_; }
  int steps() const noexcept { return static_cast<int>(times_.size()) - 1; }
  double start() const noexcept { return times_.front(); }
  double end() const noexcept { return times_.back(); }
  double mesh() const noexcept;
  /// Position of t among the partition times, matched to within tol * (end - start).
  std::optional<int> index_of(double t, double tol = 1e-12) const;

 private:
  std::vector<double> times_;
};

/// t_j = s + j (t - s) / n. Throws InvalidPartition for n < 1 or s >= t.
Partition uniform_partition(double s, double t, int n);

/// Q_{t_0,t_1} ... Q_{t_{n-1},t_n} f, applying the last step first. Steps of
/// equal length reuse one assembled operator when sigma is time invariant.
GridFunction apply_product(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                           const GridFunction& f);

struct ConvergenceRow {
  int n = 0;
  double mesh = 0.0;
  double sup_error = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  /// Log-log fit of sup_error on mesh; empty when some error is zero.
  std::optional<PowerLawFit> fit;

  bool strictly_decreasing() const;
};

/// Uniform-partition products for every n in n_list against a fixed reference.
/// Throws InvalidArgument unless n_list is ascending with at least 3 entries.
ConvergenceTable convergence_study(const QuadratureGrid& grid, const TimeScaling& scaling, double s, double t,
                                   const GridFunction& f, std::span<const int> n_list,
                                   const GridFunction& reference);

/// Same, with the product at 2 * max(n_list) as reference. The last entry of
/// n_list must be at least 4 times the first.
ConvergenceTable self_convergence_study(const QuadratureGrid& grid, const TimeScaling& scaling, double s,
                                        double t, const GridFunction& f, std::span<const int> n_list);

struct GeneratorDefectRow {
  double h = 0.0;
  double defect = 0.0;  // sup |(Q_{t-h,t} f - f) / h - A_t f|
};

struct GeneratorConsistency {
  std::vector<GeneratorDefectRow> rows;
  std::optional<PowerLawFit> fit;  // defect ~ h^p; empty when some defect is zero

  bool decreasing() const;
};

/// One-step defect of the kernel against the spectral generator A_t. Needs a
/// scalar scaling and h_list strictly descending with t - h inside the
/// resolution limit for every h.
GeneratorConsistency generator_consistency_check(const QuadratureGrid& grid, const TimeScaling& scaling, double t,
                                                 const SpectralFunction& f, std::span<const double> h_list);

}  // namespace chernoff

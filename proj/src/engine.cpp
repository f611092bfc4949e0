#include "chernoff/engine.hpp"

#include <algorithm>
#include <cmath>

#include "chernoff/error.hpp"
#include "chernoff/spectral_reference.hpp"

namespace chernoff {

Partition::Partition(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw Error(ErrorCode::InvalidPartition, "a partition needs at least one step");
  for (std::size_t j = 0; j < times_.size(); ++j) {
    if (!std::isfinite(times_[j])) throw Error(ErrorCode::InvalidPartition, "partition times must be finite");
    if (j > 0 && !(times_[j - 1] < times_[j])) {
      throw Error(ErrorCode::InvalidPartition, "partition times must be strictly increasing");
    }
  }
}

double Partition::mesh() const noexcept {
  double mesh = 0.0;
  for (std::size_t j = 1; j < times_.size(); ++j) mesh = std::max(mesh, times_[j] - times_[j - 1]);
  return mesh;
}

std::optional<int> Partition::index_of(double t, double tol) const {
  const double slack = tol * (end() - start());
  for (std::size_t j = 0; j < times_.size(); ++j) {
    if (std::abs(times_[j] - t) <= slack) return static_cast<int>(j);
  }
  return std::nullopt;
}

Partition uniform_partition(double s, double t, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidPartition, "uniform partition needs n >= 1");
  if (!(s < t)) throw Error(ErrorCode::InvalidPartition, "uniform partition needs s < t");
  std::vector<double> times(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) times[j] = s + j * (t - s) / n;
  times.back() = t;
  return Partition(std::move(times));
}

GridFunction apply_product(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                           const GridFunction& f) {
  if (f.size() != grid.size()) throw Error(ErrorCode::ShapeMismatch, "grid function length does not match the grid");
  const auto& times = partition.times();
  const bool reuse = scaling.is_time_invariant();
  std::optional<KernelOperator> op;
  GridFunction u = f;
  for (int j = partition.steps() - 1; j >= 0; --j) {
    const double a = times[j];
    const double b = times[j + 1];
    if (!op || !reuse || op->end() - op->start() != b - a) {
      op.emplace(assemble_step_operator(grid, scaling, a, b));
    }
    u = op->apply(u);
  }
  return u;
}

bool ConvergenceTable::strictly_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].sup_error < rows[i - 1].sup_error)) return false;
  }
  return true;
}

namespace {

void require_n_list(std::span<const int> n_list) {
  if (n_list.size() < 3) throw Error(ErrorCode::InvalidArgument, "n_list needs at least 3 entries");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw Error(ErrorCode::InvalidArgument, "n_list entries must be positive");
    if (i > 0 && !(n_list[i - 1] < n_list[i])) {
      throw Error(ErrorCode::InvalidArgument, "n_list must be strictly ascending");
    }
  }
}

template <typename Row>
std::optional<PowerLawFit> fit_rows(const std::vector<Row>& rows, double Row::*x, double Row::*y) {
  std::vector<double> xs, ys;
  for (const Row& r : rows) {
    if (!(r.*y > 0.0)) return std::nullopt;
    xs.push_back(r.*x);
    ys.push_back(r.*y);
  }
  return fit_power_law(xs, ys);
}

}  // namespace

ConvergenceTable convergence_study(const QuadratureGrid& grid, const TimeScaling& scaling, double s, double t,
                                   const GridFunction& f, std::span<const int> n_list,
                                   const GridFunction& reference) {
  require_n_list(n_list);
  if (reference.size() != grid.size()) throw Error(ErrorCode::ShapeMismatch, "reference length does not match the grid");
  ConvergenceTable table;
  for (int n : n_list) {
    const Partition p = uniform_partition(s, t, n);
    const GridFunction product = apply_product(grid, scaling, p, f);
    table.rows.push_back({n, p.mesh(), (product - reference).cwiseAbs().maxCoeff()});
  }
  table.fit = fit_rows(table.rows, &ConvergenceRow::mesh, &ConvergenceRow::sup_error);
  return table;
}

ConvergenceTable self_convergence_study(const QuadratureGrid& grid, const TimeScaling& scaling, double s,
                                        double t, const GridFunction& f, std::span<const int> n_list) {
  require_n_list(n_list);
  if (n_list.back() < 4 * n_list.front()) {
    throw Error(ErrorCode::InvalidArgument, "self convergence needs max(n_list) >= 4 * min(n_list)");
  }
  const GridFunction reference = apply_product(grid, scaling, uniform_partition(s, t, 2 * n_list.back()), f);
  return convergence_study(grid, scaling, s, t, f, n_list, reference);
}

bool GeneratorConsistency::decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].defect < rows[i - 1].defect)) return false;
  }
  return true;
}

GeneratorConsistency generator_consistency_check(const QuadratureGrid& grid, const TimeScaling& scaling, double t,
                                                 const SpectralFunction& f, std::span<const double> h_list) {
  const ScalarGeneratorModel model(scaling);
  if (h_list.empty()) throw Error(ErrorCode::InvalidArgument, "h_list is empty");
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "h_list entries must be positive");
    if (i > 0 && !(h_list[i] < h_list[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "h_list must be strictly descending");
    }
  }
  if (!(f.spec == grid.spec())) throw Error(ErrorCode::ShapeMismatch, "function and grid live on different manifolds");
  const GridFunction values = synthesize(f, grid);
  const GridFunction generator = synthesize(generator_apply(model, t, f), grid);

  GeneratorConsistency out;
  for (double h : h_list) {
    const KernelOperator q = assemble_step_operator(grid, scaling, t - h, t);
    const GridFunction defect = (q.apply(values) - values) / h - generator;
    out.rows.push_back({h, defect.cwiseAbs().maxCoeff()});
  }
  out.fit = fit_rows(out.rows, &GeneratorDefectRow::h, &GeneratorDefectRow::defect);
  return out;
}

}  // namespace chernoff

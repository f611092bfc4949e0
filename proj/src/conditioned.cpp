#include "chernoff/conditioned.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "chernoff/error.hpp"
#include "chernoff/parallel.hpp"
#include "chernoff/spectral_reference.hpp"

namespace chernoff {

Eigen::Index sample_categorical(std::span<const double> probabilities, Rng& rng) {
  if (probabilities.empty()) throw Error(ErrorCode::InvalidArgument, "no categories to sample from");
  double total = 0.0;
  for (double p : probabilities) total += p;
  const double target = rng.uniform() * total;
  double cum = 0.0;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    cum += probabilities[j];
    if (target < cum) return static_cast<Eigen::Index>(j);
  }
  return static_cast<Eigen::Index>(probabilities.size() - 1);
}

Eigen::Index sample_step(const QuadratureGrid& grid, const TimeScaling& scaling, double t_i, Eigen::Index x_i,
                         double t_next, Rng& rng) {
  if (x_i < 0 || x_i >= grid.size()) throw Error(ErrorCode::InvalidArgument, "start node out of range");
  resolution_check(grid, scaling, t_i, t_next);
  std::vector<double> row(static_cast<std::size_t>(grid.size()));
  kernel_row(grid, scaling, t_i, t_next, x_i, row);
  return sample_categorical(row, rng);
}

PathSkeleton sample_skeleton(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                             Eigen::Index x0, Rng& rng) {
  if (x0 < 0 || x0 >= grid.size()) throw Error(ErrorCode::InvalidArgument, "start node out of range");
  PathSkeleton path;
  path.times = partition.times();
  path.seed = rng.seed();
  path.stream = rng.stream();
  path.nodes.push_back(x0);
  const auto& times = partition.times();
  for (int j = 0; j < partition.steps(); ++j) {
    path.nodes.push_back(sample_step(grid, scaling, times[j], path.nodes.back(), times[j + 1], rng));
  }
  return path;
}

namespace {

// Row-wise ascending cumulative sums of a step operator.
RowMatrix cumulative_rows(const KernelOperator& op) {
  RowMatrix cdf = op.matrix();
  const Eigen::Index n = cdf.cols();
  parallel_for(static_cast<std::size_t>(cdf.rows()), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double* row = cdf.data() + static_cast<Eigen::Index>(i) * n;
      double cum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        cum += row[j];
        row[j] = cum;
      }
    }
  });
  return cdf;
}

// Step operators in forward order, reusing one matrix for equal steps when
// sigma is time invariant.
class StepOperators {
 public:
  StepOperators(const QuadratureGrid& grid, const TimeScaling& scaling) : grid_(grid), scaling_(scaling) {}

  const KernelOperator& get(double a, double b) {
    if (!op_ || !scaling_.is_time_invariant() || op_->end() - op_->start() != b - a) {
      op_.emplace(assemble_step_operator(grid_, scaling_, a, b));
      ++builds_;
    }
    return *op_;
  }

  /// Number of assemblies so far; changes exactly when get() rebuilt.
  std::size_t builds() const noexcept { return builds_; }

 private:
  const QuadratureGrid& grid_;
  const TimeScaling& scaling_;
  std::optional<KernelOperator> op_;
  std::size_t builds_ = 0;
};

}  // namespace

std::vector<std::int32_t> sample_positions(const QuadratureGrid& grid, const TimeScaling& scaling,
                                           const Partition& partition, Eigen::Index x0, std::uint64_t seed,
                                           std::int64_t path_count, std::span<const int> record_steps) {
  if (x0 < 0 || x0 >= grid.size()) throw Error(ErrorCode::InvalidArgument, "start node out of range");
  if (path_count < 1) throw Error(ErrorCode::InvalidArgument, "path count must be positive");
  for (int k : record_steps) {
    if (k < 0 || k > partition.steps()) throw Error(ErrorCode::InvalidArgument, "record step outside the partition");
  }
  const auto paths = static_cast<std::size_t>(path_count);
  const std::size_t stride = record_steps.size();
  std::vector<std::int32_t> recorded(paths * stride);
  std::vector<std::int32_t> current(paths, static_cast<std::int32_t>(x0));
  std::vector<Rng> rngs;
  rngs.reserve(paths);
  for (std::size_t p = 0; p < paths; ++p) rngs.push_back(Rng::for_stream(seed, p));

  auto record = [&](int step) {
    for (std::size_t k = 0; k < stride; ++k) {
      if (record_steps[k] != step) continue;
      for (std::size_t p = 0; p < paths; ++p) recorded[p * stride + k] = current[p];
    }
  };
  record(0);

  const auto& times = partition.times();
  const Eigen::Index n = grid.size();
  StepOperators ops(grid, scaling);
  std::size_t built = 0;
  RowMatrix cdf;
  for (int j = 0; j < partition.steps(); ++j) {
    const KernelOperator& op = ops.get(times[j], times[j + 1]);
    if (ops.builds() != built) {
      cdf = cumulative_rows(op);
      built = ops.builds();
    }
    parallel_for(paths, [&](std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) {
        const double* row = cdf.data() + static_cast<Eigen::Index>(current[p]) * n;
        const double target = rngs[p].uniform() * row[n - 1];
        const double* hit = std::upper_bound(row, row + n, target);
        current[p] = static_cast<std::int32_t>(std::min<std::ptrdiff_t>(hit - row, n - 1));
      }
    });
    record(j + 1);
  }
  return recorded;
}

Eigen::VectorXd chain_marginal(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                               Eigen::Index x0, int step) {
  if (x0 < 0 || x0 >= grid.size()) throw Error(ErrorCode::InvalidArgument, "start node out of range");
  if (step < 0 || step > partition.steps()) throw Error(ErrorCode::InvalidArgument, "step outside the partition");
  Eigen::VectorXd law = Eigen::VectorXd::Zero(grid.size());
  law[x0] = 1.0;
  const auto& times = partition.times();
  StepOperators ops(grid, scaling);
  for (int j = 0; j < step; ++j) {
    law = ops.get(times[j], times[j + 1]).matrix().transpose() * law;
  }
  return law;
}

std::vector<int> partition_indices(const Partition& partition, std::span<const double> times) {
  if (times.empty()) throw Error(ErrorCode::InvalidArgument, "no observation times");
  std::vector<int> idx;
  for (double t : times) {
    const auto k = partition.index_of(t);
    if (!k) throw Error(ErrorCode::TimesNotInPartition, "time " + std::to_string(t) + " is not a partition time");
    if (!idx.empty() && *k <= idx.back()) {
      throw Error(ErrorCode::InvalidArgument, "observation times must be strictly increasing");
    }
    idx.push_back(*k);
  }
  return idx;
}

namespace {

void require_factors(std::span<const double> times, std::span<const TestFunction> factors, const ManifoldSpec& spec) {
  if (times.size() != factors.size()) {
    throw Error(ErrorCode::ShapeMismatch, "need one test function factor per observation time");
  }
  for (const TestFunction& f : factors) f.check_compatible(spec);
}

}  // namespace

double fdd_reference_chain(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                           Eigen::Index x0, std::span<const double> times, std::span<const TestFunction> factors) {
  if (x0 < 0 || x0 >= grid.size()) throw Error(ErrorCode::InvalidArgument, "start node out of range");
  require_factors(times, factors, grid.spec());
  const std::vector<int> idx = partition_indices(partition, times);
  const auto& pt = partition.times();
  const std::size_t k = idx.size();

  // Backward over the steps: multiply in factor i on arrival at index idx[i].
  GridFunction g = factors[k - 1].on_grid(grid);
  std::size_t next = k - 1;
  std::optional<KernelOperator> op;
  const bool reuse = scaling.is_time_invariant();
  for (int j = idx[k - 1] - 1; j >= 0; --j) {
    if (!op || !reuse || op->end() - op->start() != pt[j + 1] - pt[j]) {
      op.emplace(assemble_step_operator(grid, scaling, pt[j], pt[j + 1]));
    }
    g = op->apply(g);
    while (next > 0 && idx[next - 1] == j) {
      --next;
      g = g.cwiseProduct(factors[next].on_grid(grid));
    }
  }
  return g[x0];
}

double fdd_reference_diffusion(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                               Eigen::Index x0, std::span<const double> times,
                               std::span<const TestFunction> factors) {
  if (x0 < 0 || x0 >= grid.size()) throw Error(ErrorCode::InvalidArgument, "start node out of range");
  require_factors(times, factors, grid.spec());
  const ScalarGeneratorModel model(scaling);
  const std::vector<int> idx = partition_indices(partition, times);
  const auto& pt = partition.times();
  const std::size_t k = idx.size();
  const int cap = EigenBasis::default_max_degree(grid);

  SpectralFunction u = factors[k - 1].to_spectral(grid);
  for (std::size_t i = k - 1; i > 0; --i) {
    u = propagate(model, pt[idx[i - 1]], pt[idx[i]], u);
    const int degree = u.max_degree + factors[i - 1].degree();
    if (degree > cap) throw Error(ErrorCode::InvalidArgument, "product degree exceeds the grid's exact range");
    const GridFunction values = synthesize(u, grid).cwiseProduct(factors[i - 1].on_grid(grid));
    u = project(grid, values, degree);
  }
  u = propagate(model, partition.start(), pt[idx[0]], u);
  return evaluate(u, grid.node(x0));
}

FddReport fdd_estimate(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                       Eigen::Index x0, std::span<const double> times, std::span<const TestFunction> factors,
                       std::int64_t path_count, std::uint64_t seed) {
  if (path_count < 10000) throw Error(ErrorCode::InvalidArgument, "fdd estimate needs at least 1e4 paths");
  require_factors(times, factors, grid.spec());
  const std::vector<int> idx = partition_indices(partition, times);

  FddReport report;
  report.times.assign(times.begin(), times.end());
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i > 0) report.function_id += "|";
    report.function_id += factors[i].id();
  }
  report.paths = path_count;
  report.seed = seed;
  report.reference_chain = fdd_reference_chain(grid, scaling, partition, x0, times, factors);
  report.reference_diffusion = scaling.is_scalar()
                                   ? fdd_reference_diffusion(grid, scaling, partition, x0, times, factors)
                                   : std::numeric_limits<double>::quiet_NaN();

  const std::vector<std::int32_t> positions = sample_positions(grid, scaling, partition, x0, seed, path_count, idx);
  std::vector<GridFunction> values;
  for (const TestFunction& f : factors) values.push_back(f.on_grid(grid));
  const std::size_t k = idx.size();
  const auto paths = static_cast<std::size_t>(path_count);
  std::vector<double> samples(paths);
  for (std::size_t p = 0; p < paths; ++p) {
    double v = 1.0;
    for (std::size_t i = 0; i < k; ++i) v *= values[i][positions[p * k + i]];
    samples[p] = v;
  }
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / static_cast<double>(paths);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  report.mc_mean = mean;
  report.mc_stderr = std::sqrt(ss / static_cast<double>(paths - 1)) / std::sqrt(static_cast<double>(paths));
  const double gap = std::abs(mean - report.reference_chain);
  if (report.mc_stderr > 0.0) {
    report.z_score = gap / report.mc_stderr;
  } else {
    report.z_score = gap <= 1e-12 * std::max(1.0, std::abs(mean)) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return report;
}

namespace {

// Gaussian density in R^m of sigma(b) Y - a_point with variance h per axis,
// times det sigma(b).
double scaled_gaussian(const Eigen::VectorXd& image, const Eigen::VectorXd& source, double h, double det) {
  const double m = static_cast<double>(image.size());
  return det / std::pow(2.0 * std::numbers::pi * h, 0.5 * m) *
         std::exp(-(image - source).squaredNorm() / (2.0 * h));
}

// int_M p(a, from, b, .) dlambda_M by grid quadrature, with from given as
// sigma(a) * from.
double manifold_mass(const QuadratureGrid& grid, const Eigen::MatrixXd& image_b, const Eigen::VectorXd& source,
                     double h, double det_b) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    sum += grid.weights()[j] * scaled_gaussian(image_b.col(j), source, h, det_b);
  }
  return sum;
}

struct OffPartitionSetup {
  Eigen::VectorXd dr, dtau, dti;
  Eigen::MatrixXd image_ti;
  Eigen::VectorXd zr;
  double denominator = 0.0;
};

OffPartitionSetup off_partition_setup(const QuadratureGrid& grid, const TimeScaling& scaling, double r,
                                      const PointRef& z, double tau, double t_i) {
  if (!(r < tau && tau < t_i)) throw Error(ErrorCode::InvalidTimeOrder, "expected r < tau < t_i");
  require_on_manifold(grid.spec(), z);
  const int m = grid.spec().ambient_dim();
  OffPartitionSetup s;
  s.dr = scaling.diag(r, m);
  s.dtau = scaling.diag(tau, m);
  s.dti = scaling.diag(t_i, m);
  s.image_ti = s.dti.asDiagonal() * grid.nodes();
  s.zr = s.dr.cwiseProduct(z);
  s.denominator = manifold_mass(grid, s.image_ti, s.zr, t_i - r, s.dti.prod());
  return s;
}

double off_partition_value(const QuadratureGrid& grid, const OffPartitionSetup& s, double r, double tau, double t_i,
                           const Eigen::VectorXd& y) {
  const Eigen::VectorXd ytau = s.dtau.cwiseProduct(y);
  const double head = scaled_gaussian(ytau, s.zr, tau - r, s.dtau.prod());
  const double numerator = manifold_mass(grid, s.image_ti, ytau, t_i - tau, s.dti.prod());
  return head * numerator / s.denominator;
}

}  // namespace

double off_partition_density(const QuadratureGrid& grid, const TimeScaling& scaling, double r, const PointRef& z,
                             double tau, double t_i, const PointRef& y) {
  const OffPartitionSetup s = off_partition_setup(grid, scaling, r, z, tau, t_i);
  if (y.size() != grid.spec().ambient_dim()) throw Error(ErrorCode::ShapeMismatch, "y has the wrong dimension");
  return off_partition_value(grid, s, r, tau, t_i, y);
}

double off_partition_mass(const QuadratureGrid& grid, const TimeScaling& scaling, double r, const PointRef& z,
                          double tau, double t_i, int points_per_axis, double widths) {
  if (grid.spec().kind != ManifoldKind::circle) {
    throw Error(ErrorCode::InvalidArgument, "off-partition mass is computed on the circle only");
  }
  if (points_per_axis < 3 || !(widths > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad box quadrature parameters");
  const OffPartitionSetup s = off_partition_setup(grid, scaling, r, z, tau, t_i);
  // y is centered at sigma(tau)^-1 sigma(r) z with per-axis spread sqrt(tau - r) / |c_i(tau)|.
  const Eigen::VectorXd center = s.zr.cwiseQuotient(s.dtau);
  const Eigen::VectorXd spread = (std::sqrt(tau - r) * s.dtau.cwiseAbs().cwiseInverse());
  const Eigen::VectorXd lo = center - widths * spread;
  const Eigen::VectorXd step = 2.0 * widths * spread / (points_per_axis - 1);
  const auto count = static_cast<std::size_t>(points_per_axis);

  std::vector<double> row_sums(count);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd y(2);
    for (std::size_t a = begin; a < end; ++a) {
      y[0] = lo[0] + static_cast<double>(a) * step[0];
      double sum = 0.0;
      for (std::size_t b = 0; b < count; ++b) {
        y[1] = lo[1] + static_cast<double>(b) * step[1];
        const double w = (b == 0 || b == count - 1) ? 0.5 : 1.0;
        sum += w * off_partition_value(grid, s, r, tau, t_i, y);
      }
      row_sums[a] = sum;
    }
  });
  double total = 0.0;
  for (std::size_t a = 0; a < count; ++a) total += ((a == 0 || a == count - 1) ? 0.5 : 1.0) * row_sums[a];
  return total * step[0] * step[1];
}

std::vector<ShellRow> shell_density_limit(const QuadratureGrid& grid, const TimeScaling& scaling, double s,
                                          const PointRef& x, double t, std::span<const double> eps_list,
                                          const GridFunction& f, int radial_nodes) {
  const ManifoldSpec& spec = grid.spec();
  if (spec.kind != ManifoldKind::circle) throw Error(ErrorCode::InvalidArgument, "shell limit is computed on the circle only");
  if (!(s < t)) throw Error(ErrorCode::InvalidTimeOrder, "expected s < t");
  if (f.size() != grid.size()) throw Error(ErrorCode::ShapeMismatch, "grid function length does not match the grid");
  require_on_manifold(spec, x);
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "shell widths must be positive");
    if (eps_list[i] >= 0.5 * spec.radius) throw Error(ErrorCode::ShellTooThick, "shell width must stay below r/2");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "shell widths must be strictly decreasing");
    }
  }

  const Eigen::VectorXd ds = scaling.diag(s, 2);
  const Eigen::VectorXd dt = scaling.diag(t, 2);
  const Eigen::VectorXd source = ds.cwiseProduct(x);
  const double h = t - s;
  const double det = dt.prod();
  auto density = [&](const Eigen::VectorXd& y) { return scaled_gaussian(dt.cwiseProduct(y), source, h, det); };

  double limit_num = 0.0;
  double limit_den = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double p = grid.weights()[j] * density(grid.node(j));
    limit_num += p * f[j];
    limit_den += p;
  }
  const double limit = limit_num / limit_den;

  Eigen::VectorXd gl_x, gl_w;
  gauss_legendre(radial_nodes, gl_x, gl_w);
  std::vector<ShellRow> rows;
  for (double eps : eps_list) {
    double num = 0.0;
    double den = 0.0;
    Eigen::VectorXd y(2);
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      const Eigen::VectorXd dir = grid.node(j) / spec.radius;
      double radial = 0.0;
      for (Eigen::Index q = 0; q < gl_x.size(); ++q) {
        const double rho = spec.radius + eps * gl_x[q];
        y = rho * dir;
        radial += gl_w[q] * eps * rho * density(y);
      }
      // Uniform angular nodes: the angular weight is common to every node.
      num += radial * f[j];
      den += radial;
    }
    const double shell = num / den;
    rows.push_back({eps, shell, limit, std::abs(shell - limit)});
  }
  return rows;
}

ChiSquareResult chi_square_gof(std::span<const std::int64_t> counts, const Eigen::VectorXd& probabilities) {
  if (static_cast<Eigen::Index>(counts.size()) != probabilities.size()) {
    throw Error(ErrorCode::ShapeMismatch, "counts and probabilities differ in length");
  }
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  if (total <= 0) throw Error(ErrorCode::InvalidArgument, "no observations");
  const double n = static_cast<double>(total);
  const double mass = probabilities.sum();

  std::vector<double> observed, expected;
  double obs = 0.0;
  double exp = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    obs += static_cast<double>(counts[j]);
    exp += n * probabilities[static_cast<Eigen::Index>(j)] / mass;
    if (exp >= 5.0) {
      observed.push_back(obs);
      expected.push_back(exp);
      obs = 0.0;
      exp = 0.0;
    }
  }
  if (exp > 0.0 || obs > 0.0) {
    if (expected.empty()) {
      observed.push_back(obs);
      expected.push_back(exp);
    } else {
      observed.back() += obs;
      expected.back() += exp;
    }
  }
  ChiSquareResult result;
  for (std::size_t b = 0; b < observed.size(); ++b) {
    const double d = observed[b] - expected[b];
    result.statistic += d * d / expected[b];
  }
  result.dof = static_cast<int>(observed.size()) - 1;
  if (result.dof < 1) throw Error(ErrorCode::InvalidArgument, "too few bins for a chi-square test");
  result.p_value = boost::math::gamma_q(0.5 * result.dof, 0.5 * result.statistic);
  return result;
}

}  // namespace chernoff

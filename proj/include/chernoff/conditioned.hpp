#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chernoff/engine.hpp"
#include "chernoff/rng.hpp"
#include "chernoff/test_functions.hpp"

namespace chernoff {

/// Inverse-CDF draw from unnormalized nonnegative weights with an ascending
/// cumulative sum; the same rule as the batched sampler.
Eigen::Index sample_categorical(std::span<const double> probabilities, Rng& rng);

/// One step of the conditioned chain: a draw from row x_i of Q_{t_i,t_next}.
Eigen::Index sample_step(const QuadratureGrid& grid, const TimeScaling& scaling, double t_i, Eigen::Index x_i,
                         double t_next, Rng& rng);

struct PathSkeleton {
  std::vector<double> times;
  std::vector<Eigen::Index> nodes;  // grid node index per partition time
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

PathSkeleton sample_skeleton(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                             Eigen::Index x0, Rng& rng);

/// Samples path_count skeletons step by step, path p using
/// Rng::for_stream(seed, p), so that every path equals sample_skeleton with
/// that generator. Returns the node of path p at partition index
/// record_steps[k] in entry p * record_steps.size() + k.
std::vector<std::int32_t> sample_positions(const QuadratureGrid& grid, const TimeScaling& scaling,
                                           const Partition& partition, Eigen::Index x0, std::uint64_t seed,
                                           std::int64_t path_count, std::span<const int> record_steps);

/// Law of the chain at partition index `step`: row x0 of Q_1 Q_2 ... Q_step.
Eigen::VectorXd chain_marginal(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                               Eigen::Index x0, int step);

/// Partition indices of `times`; throws TimesNotInPartition or InvalidArgument
/// (empty or not strictly increasing).
std::vector<int> partition_indices(const Partition& partition, std::span<const double> times);

/// E f_1(X_tau_1) ... f_k(X_tau_k) under the discrete chain started at node x0
/// at the partition start, by nested kernel contractions.
double fdd_reference_chain(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                           Eigen::Index x0, std::span<const double> times, std::span<const TestFunction> factors);

/// Same expectation under the limit diffusion, by nested spectral propagation.
/// Throws UnsupportedScaling for non-scalar sigma.
double fdd_reference_diffusion(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                               Eigen::Index x0, std::span<const double> times,
                               std::span<const TestFunction> factors);

struct FddReport {
  std::vector<double> times;
  std::string function_id;
  std::int64_t paths = 0;
  std::uint64_t seed = 0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double reference_chain = 0.0;
  double reference_diffusion = 0.0;  // NaN for non-scalar sigma
  double z_score = 0.0;              // |mc_mean - reference_chain| / mc_stderr
};

/// Monte Carlo estimate over path_count >= 1e4 skeletons.
FddReport fdd_estimate(const QuadratureGrid& grid, const TimeScaling& scaling, const Partition& partition,
                       Eigen::Index x0, std::span<const double> times, std::span<const TestFunction> factors,
                       std::int64_t path_count, std::uint64_t seed);

/// Density in y of the conditioned process between partition times:
///   p(r,z,tau,y) * int_M p(tau,y,t_i,.) / int_M p(r,z,t_i,.).
/// Throws InvalidTimeOrder unless r < tau < t_i.
double off_partition_density(const QuadratureGrid& grid, const TimeScaling& scaling, double r, const PointRef& z,
                             double tau, double t_i, const PointRef& y);

/// Integral of off_partition_density over y in a box of +-`widths` kernel
/// widths around its center, by the tensor trapezoid rule. Circle only.
double off_partition_mass(const QuadratureGrid& grid, const TimeScaling& scaling, double r, const PointRef& z,
                          double tau, double t_i, int points_per_axis = 161, double widths = 6.0);

struct ShellRow {
  double epsilon = 0.0;
  double shell = 0.0;  // E f under the ambient law conditioned on the eps-annulus
  double limit = 0.0;  // integral of f p^M over M
  double deviation = 0.0;
};

/// Shell expectations on the circle over the annulus r - eps <= |y| <= r + eps,
/// with f extended radially. Angular nodes are the grid nodes; the radial
/// integral uses Gauss-Legendre. eps_list must be strictly decreasing;
/// eps >= r/2 throws ShellTooThick.
std::vector<ShellRow> shell_density_limit(const QuadratureGrid& grid, const TimeScaling& scaling, double s,
                                          const PointRef& x, double t, std::span<const double> eps_list,
                                          const GridFunction& f, int radial_nodes = 64);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

/// Goodness of fit of counts against probabilities; adjacent bins are merged
/// until each expected count is at least 5.
ChiSquareResult chi_square_gof(std::span<const std::int64_t> counts, const Eigen::VectorXd& probabilities);

}  // namespace chernoff

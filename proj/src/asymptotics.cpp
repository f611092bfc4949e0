#include "chernoff/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "chernoff/error.hpp"
#include "chernoff/fit.hpp"
#include "chernoff/kernel.hpp"
#include "chernoff/manifold.hpp"

namespace chernoff {

namespace {

constexpr double kProfileMin = 0.5;
constexpr double kProfileMax = 3.0;
constexpr int kProfileSteps = 500;

}  // namespace

ExpansionPrediction predict_unnormalized(const SpectralFunction& g, const PointRef& y) {
  require_on_manifold(g.spec, y);
  const double gy = evaluate(g, y);
  const double lap = evaluate(laplacian(g), y);
  const double curvature = scalar_curvature(g.spec, y) / 6.0 + double_laplacian_chordal(g.spec, y) / 16.0;
  return {gy, -0.5 * lap - gy * curvature, ExpansionSource::unnormalized};
}

ExpansionPrediction predict_normalized(const SpectralFunction& g, const PointRef& x) {
  require_on_manifold(g.spec, x);
  return {evaluate(g, x), -0.5 * evaluate(laplacian(g), x), ExpansionSource::normalized};
}

ExpansionFit fit_expansion(std::span<const double> t_samples, std::span<const double> values) {
  const auto n = static_cast<Eigen::Index>(t_samples.size());
  if (t_samples.size() != values.size()) throw Error(ErrorCode::ShapeMismatch, "times and values differ in length");
  if (n < 6) throw Error(ErrorCode::InvalidArgument, "expansion fit needs at least 6 sample times");
  const auto [lo, hi] = std::minmax_element(t_samples.begin(), t_samples.end());
  if (!(*lo > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample times must be positive");
  if (*hi < 10.0 * *lo) throw Error(ErrorCode::InvalidArgument, "sample times must span a decade");

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n), weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = t_samples[i];
    design.row(i) << 1.0, t, t * std::sqrt(t);
    rhs[i] = values[i];
    weights[i] = 1.0 / t;
  }
  const LeastSquaresFit ls = weighted_least_squares(design, rhs, weights);
  if (ls.condition > 1e8) {
    throw Error(ErrorCode::IllConditionedFit, "expansion design condition " + std::to_string(ls.condition));
  }

  ExpansionFit fit;
  fit.a0 = ls.coefficients[0];
  fit.a1 = ls.coefficients[1];
  fit.b = ls.coefficients[2];
  fit.t_min = *lo;
  fit.t_max = *hi;
  fit.residual_norm = ls.residuals.cwiseAbs().maxCoeff();
  fit.condition = ls.condition;
  fit.t_samples.assign(t_samples.begin(), t_samples.end());
  fit.values.assign(values.begin(), values.end());

  // Remainder after the first-order model. Values at rounding level carry no
  // exponent information; with fewer than three left the exponent is +inf.
  int informative = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::abs(values[i] - fit.a0 - fit.a1 * t_samples[i]);
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(values[i]));
    if (r > noise) ++informative;
  }
  if (informative < 3) {
    fit.remainder_exponent = std::numeric_limits<double>::infinity();
    fit.remainder_constant = 0.0;
    return fit;
  }

  // The exponent is profiled: for each q the model a0 + a1 t + K t^q is fitted
  // linearly and the q with the smallest weighted residual wins. Fixing q at
  // 3/2 would let the nuisance column absorb slower remainders.
  double best_q = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  double best_k = 0.0;
  for (int step = 0; step <= kProfileSteps; ++step) {
    const double q = kProfileMin + (kProfileMax - kProfileMin) * step / kProfileSteps;
    for (Eigen::Index i = 0; i < n; ++i) design(i, 2) = std::pow(t_samples[i], q);
    const LeastSquaresFit trial = weighted_least_squares(design, rhs, weights);
    const double cost = trial.residuals.cwiseProduct(weights).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best_q = q;
      best_k = trial.coefficients[2];
    }
  }
  fit.remainder_exponent = best_q;
  fit.remainder_constant = std::abs(best_k);
  return fit;
}

namespace {

void require_resolved(const QuadratureGrid& grid, double t) {
  resolution_check(grid, TimeScaling::identity(), 0.0, t);
}

// sum_j w_j g_j exp(-|z_j - y|^2 / 2t) and the same sum without g, both
// accumulated in ascending node order.
std::pair<double, double> gaussian_sums(const QuadratureGrid& grid, const GridFunction& g, const PointRef& y,
                                        double t) {
  if (g.size() != grid.size()) throw Error(ErrorCode::ShapeMismatch, "grid function length does not match the grid");
  require_on_manifold(grid.spec(), y);
  double with_g = 0.0;
  double plain = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double k = grid.weights()[j] * std::exp(-chordal_sq(grid.node(j), y) / (2.0 * t));
    with_g += k * g[j];
    plain += k;
  }
  return {with_g, plain};
}

}  // namespace

double unnormalized_integral(const QuadratureGrid& grid, const GridFunction& g, const PointRef& y, double t) {
  const double d = grid.spec().intrinsic_dim();
  return gaussian_sums(grid, g, y, t).first / std::pow(2.0 * std::numbers::pi * t, 0.5 * d);
}

double normalized_ratio(const QuadratureGrid& grid, const GridFunction& g, const PointRef& x, double t) {
  const auto [with_g, plain] = gaussian_sums(grid, g, x, t);
  return with_g / plain;
}

ExpansionFit measure_unnormalized(const QuadratureGrid& grid, const GridFunction& g, const PointRef& y,
                                  std::span<const double> t_samples) {
  std::vector<double> values;
  for (double t : t_samples) {
    require_resolved(grid, t);
    values.push_back(unnormalized_integral(grid, g, y, t));
  }
  return fit_expansion(t_samples, values);
}

ExpansionFit measure_normalized(const QuadratureGrid& grid, const GridFunction& g, const PointRef& x,
                                std::span<const double> t_samples) {
  std::vector<double> values;
  for (double t : t_samples) {
    require_resolved(grid, t);
    values.push_back(normalized_ratio(grid, g, x, t));
  }
  return fit_expansion(t_samples, values);
}

bool remainder_exponent_check(const ExpansionFit& fit, double threshold) {
  return fit.remainder_exponent >= threshold;
}

double tail_mass(const QuadratureGrid& grid, const PointRef& y, double t, double radius_fraction) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "tail mass needs t > 0");
  const ManifoldSpec& spec = grid.spec();
  require_on_manifold(spec, y);
  const double radius = radius_fraction * spec.radius;
  const double norm = std::pow(2.0 * std::numbers::pi * t, 0.5 * spec.intrinsic_dim());
  double mass = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    if (geodesic_distance(spec, grid.node(j), y) <= radius) continue;
    mass += grid.weights()[j] * std::exp(-chordal_sq(grid.node(j), y) / (2.0 * t));
  }
  return mass / norm;
}

double tail_threshold_time(const QuadratureGrid& grid, const PointRef& y, std::span<const double> t_candidates,
                           double radius_fraction) {
  std::vector<double> ts(t_candidates.begin(), t_candidates.end());
  std::sort(ts.begin(), ts.end());
  double t0 = 0.0;
  for (double t : ts) {
    if (tail_mass(grid, y, t, radius_fraction) > std::pow(t, 1.5)) break;
    t0 = t;
  }
  return t0;
}

}  // namespace chernoff

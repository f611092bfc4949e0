#include "chernoff/quadrature.hpp"

#include <array>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <numbers>

#include "chernoff/error.hpp"

namespace chernoff {

namespace {

constexpr int kMinResolution = 8;

QuadratureGrid build_circle(const ManifoldSpec& spec, int n) {
  Eigen::MatrixXd nodes(2, n);
  const double step = 2.0 * std::numbers::pi / n;
  for (int j = 0; j < n; ++j) {
    nodes(0, j) = spec.radius * std::cos(step * j);
    nodes(1, j) = spec.radius * std::sin(step * j);
  }
  // Exact placement at the quarter turns keeps the symmetric nodes bit-exact.
  if (n % 4 == 0) {
    for (int q = 0; q < 4; ++q) {
      const int j = q * n / 4;
      nodes(0, j) = spec.radius * std::array{1.0, 0.0, -1.0, 0.0}[q];
      nodes(1, j) = spec.radius * std::array{0.0, 1.0, 0.0, -1.0}[q];
    }
  }
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, spec.volume() / n);
  return QuadratureGrid(spec, {n, 0}, std::move(nodes), std::move(weights));
}

QuadratureGrid build_sphere(const ManifoldSpec& spec, int n_colat, int n_lon) {
  Eigen::VectorXd u;
  Eigen::VectorXd gl_w;
  gauss_legendre(n_colat, u, gl_w);
  const Eigen::Index count = static_cast<Eigen::Index>(n_colat) * n_lon;
  Eigen::MatrixXd nodes(3, count);
  Eigen::VectorXd weights(count);
  const double dlon = 2.0 * std::numbers::pi / n_lon;
  const double r = spec.radius;
  for (int i = 0; i < n_colat; ++i) {
    // Ring 0 is the northernmost (largest cos(colatitude)).
    const double cz = u[n_colat - 1 - i];
    const double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
    const double w = gl_w[n_colat - 1 - i] * dlon * r * r;
    for (int k = 0; k < n_lon; ++k) {
      const Eigen::Index j = static_cast<Eigen::Index>(i) * n_lon + k;
      nodes(0, j) = r * sz * std::cos(dlon * k);
      nodes(1, j) = r * sz * std::sin(dlon * k);
      nodes(2, j) = r * cz;
      weights[j] = w;
    }
  }
  return QuadratureGrid(spec, {n_colat, n_lon}, std::move(nodes), std::move(weights));
}

}  // namespace

QuadratureGrid::QuadratureGrid(ManifoldSpec spec, GridResolution resolution,
                               Eigen::MatrixXd nodes, Eigen::VectorXd weights)
    : spec_(spec), resolution_(resolution), nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.rows() != spec_.ambient_dim() || nodes_.cols() != weights_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "grid nodes and weights are inconsistent");
  }
}

double QuadratureGrid::max_adjacent_spacing(const Eigen::VectorXd& scale) const {
  if (scale.size() != nodes_.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "scale dimension does not match the ambient space");
  }
  auto dist = [&](Eigen::Index a, Eigen::Index b) {
    return (scale.asDiagonal() * (nodes_.col(a) - nodes_.col(b))).norm();
  };
  double spacing = 0.0;
  if (spec_.kind == ManifoldKind::circle) {
    const Eigen::Index n = size();
    for (Eigen::Index j = 0; j < n; ++j) spacing = std::max(spacing, dist(j, (j + 1) % n));
    return spacing;
  }
  const Eigen::Index rings = resolution_.primary;
  const Eigen::Index lons = resolution_.secondary;
  for (Eigen::Index i = 0; i < rings; ++i) {
    for (Eigen::Index k = 0; k < lons; ++k) {
      const Eigen::Index j = i * lons + k;
      spacing = std::max(spacing, dist(j, i * lons + (k + 1) % lons));
      if (i + 1 < rings) spacing = std::max(spacing, dist(j, j + lons));
    }
  }
  return spacing;
}

Eigen::Index QuadratureGrid::nearest_node(const PointRef& p) const {
  Eigen::Index best = 0;
  (nodes_.colwise() - p).colwise().squaredNorm().minCoeff(&best);
  return best;
}

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const std::vector<double> positive = boost::math::legendre_p_zeros<double>(n);
  nodes.resize(n);
  weights.resize(n);
  // boost returns the non-negative zeros in ascending order (0 first when n is odd).
  const int half = n / 2;
  for (int i = 0; i < static_cast<int>(positive.size()); ++i) {
    const double x = positive[i];
    const double dp = boost::math::legendre_p_prime(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const int upper = half + i;
    const int lower = n - 1 - upper;
    nodes[upper] = x;
    weights[upper] = w;
    nodes[lower] = -x;
    weights[lower] = w;
  }
}

QuadratureGrid build_grid(const ManifoldSpec& spec, GridResolution resolution) {
  if (spec.kind == ManifoldKind::circle) {
    if (resolution.primary < kMinResolution) {
      throw Error(ErrorCode::InvalidResolution, "circle grid needs at least 8 nodes");
    }
    return build_circle(spec, resolution.primary);
  }
  if (resolution.primary < kMinResolution || resolution.secondary < kMinResolution) {
    throw Error(ErrorCode::InvalidResolution,
                "sphere grid needs at least 8 colatitude rings and 8 longitudes");
  }
  return build_sphere(spec, resolution.primary, resolution.secondary);
}

double integrate(const QuadratureGrid& grid, const GridFunction& f) {
  if (f.size() != grid.size()) {
    throw Error(ErrorCode::ShapeMismatch, "grid function length does not match the grid");
  }
  double sum = 0.0;
  const auto& w = grid.weights();
  for (Eigen::Index j = 0; j < f.size(); ++j) sum += w[j] * f[j];
  return sum;
}

}  // namespace chernoff

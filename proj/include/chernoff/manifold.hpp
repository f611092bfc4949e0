#pragma once

#include <Eigen/Dense>

namespace chernoff {

enum class ManifoldKind { circle, sphere };

/// A centered circle S^1_r in R^2 or sphere S^2_r in R^3.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::circle;
  double radius = 1.0;

  static ManifoldSpec circle(double radius);
  static ManifoldSpec sphere(double radius);

  int ambient_dim() const noexcept { return kind == ManifoldKind::circle ? 2 : 3; }
  int intrinsic_dim() const noexcept { return kind == ManifoldKind::circle ? 1 : 2; }
  /// 2*pi*r or 4*pi*r^2.
  double volume() const noexcept;

  friend bool operator==(const ManifoldSpec&, const ManifoldSpec&) = default;
};

using PointRef = Eigen::Ref<const Eigen::VectorXd>;

/// Relative tolerance used when deciding whether a point lies on M.
inline constexpr double kOnManifoldTolerance = 1e-9;

bool on_manifold(const ManifoldSpec& spec, const PointRef& p,
                 double rel_tol = kOnManifoldTolerance);
void require_on_manifold(const ManifoldSpec& spec, const PointRef& p);

/// Squared Euclidean (ambient) distance.
double chordal_sq(const PointRef& p, const PointRef& q);

/// Arc length r * (central angle). Throws PointNotOnManifold.
double geodesic_distance(const ManifoldSpec& spec, const PointRef& p, const PointRef& q);

/// 0 on the circle, 2/r^2 on the sphere.
double scalar_curvature(const ManifoldSpec& spec, const PointRef& p);

/// Value at z = y of the Laplace-Beltrami operator applied twice to
/// z -> |z - y|^2. Independent of the sign convention of the Laplacian.
double double_laplacian_chordal(const ManifoldSpec& spec, const PointRef& y);

/// Orthogonal projection of v onto the tangent space at base.
Eigen::VectorXd project_tangent(const ManifoldSpec& spec, const PointRef& base,
                                const PointRef& v);

/// Polar angle in (-pi, pi] of a circle point.
double circle_angle(const PointRef& p);
/// Colatitude in [0, pi] and longitude in (-pi, pi] of a sphere point.
double colatitude(const PointRef& p);
double longitude(const PointRef& p);

/// Ambient point from intrinsic coordinates.
Eigen::VectorXd circle_point(double radius, double angle);
Eigen::VectorXd sphere_point(double radius, double colat, double lon);

}  // namespace chernoff

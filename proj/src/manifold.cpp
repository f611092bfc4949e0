#include "chernoff/manifold.hpp"

#include <cmath>
#include <numbers>

#include "chernoff/error.hpp"

namespace chernoff {

namespace {

void require_dim(const ManifoldSpec& spec, const PointRef& p) {
  if (p.size() != spec.ambient_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "point dimension does not match the ambient space");
  }
}

}  // namespace

ManifoldSpec ManifoldSpec::circle(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  return {ManifoldKind::circle, radius};
}

ManifoldSpec ManifoldSpec::sphere(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  return {ManifoldKind::sphere, radius};
}

double ManifoldSpec::volume() const noexcept {
  constexpr double pi = std::numbers::pi;
  return kind == ManifoldKind::circle ? 2.0 * pi * radius : 4.0 * pi * radius * radius;
}

bool on_manifold(const ManifoldSpec& spec, const PointRef& p, double rel_tol) {
  if (p.size() != spec.ambient_dim()) return false;
  return std::abs(p.norm() - spec.radius) <= rel_tol * spec.radius;
}

void require_on_manifold(const ManifoldSpec& spec, const PointRef& p) {
  require_dim(spec, p);
  if (!on_manifold(spec, p)) {
    throw Error(ErrorCode::PointNotOnManifold, "point is not on the manifold");
  }
}

double chordal_sq(const PointRef& p, const PointRef& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::ShapeMismatch, "point dimensions differ");
  return (p - q).squaredNorm();
}

double geodesic_distance(const ManifoldSpec& spec, const PointRef& p, const PointRef& q) {
  require_on_manifold(spec, p);
  require_on_manifold(spec, q);
  // atan2 of |p x q| and p.q is accurate for both tiny and near-antipodal angles.
  double cross = 0.0;
  if (spec.kind == ManifoldKind::circle) {
    cross = std::abs(p[0] * q[1] - p[1] * q[0]);
  } else {
    cross = Eigen::Vector3d(p[0], p[1], p[2]).cross(Eigen::Vector3d(q[0], q[1], q[2])).norm();
  }
  return spec.radius * std::atan2(cross, p.dot(q));
}

double scalar_curvature(const ManifoldSpec& spec, const PointRef& p) {
  require_on_manifold(spec, p);
  if (spec.kind == ManifoldKind::circle) return 0.0;
  return 2.0 / (spec.radius * spec.radius);
}

double double_laplacian_chordal(const ManifoldSpec& spec, const PointRef& y) {
  require_on_manifold(spec, y);
  // |z-y|^2 = 2r^2(1 - cos g) in geodesic polar coordinates around y.
  // Circle: d^4/ds^4 gives -2/r^2. Sphere: radial Laplacian (f'' + cot(g) f')/r^2
  // applied twice gives -8/r^2.
  const double r2 = spec.radius * spec.radius;
  return spec.kind == ManifoldKind::circle ? -2.0 / r2 : -8.0 / r2;
}

Eigen::VectorXd project_tangent(const ManifoldSpec& spec, const PointRef& base, const PointRef& v) {
  require_dim(spec, base);
  require_dim(spec, v);
  const Eigen::VectorXd normal = base / base.norm();
  return v - normal.dot(v) * normal;
}

double circle_angle(const PointRef& p) { return std::atan2(p[1], p[0]); }

double colatitude(const PointRef& p) {
  return std::atan2(std::hypot(p[0], p[1]), p[2]);
}

double longitude(const PointRef& p) { return std::atan2(p[1], p[0]); }

Eigen::VectorXd circle_point(double radius, double angle) {
  return Eigen::Vector2d(radius * std::cos(angle), radius * std::sin(angle));
}

Eigen::VectorXd sphere_point(double radius, double colat, double lon) {
  const double s = std::sin(colat);
  return Eigen::Vector3d(radius * s * std::cos(lon), radius * s * std::sin(lon),
                         radius * std::cos(colat));
}

}  // namespace chernoff

#include "chernoff/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "chernoff/error.hpp"
#include "chernoff/parallel.hpp"

namespace chernoff {

namespace {

void require_time_order(double s, double t) {
  if (!(s < t)) throw Error(ErrorCode::InvalidTimeOrder, "expected s < t");
}

double gaussian_density(double h, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double m = static_cast<double>(a.size());
  return std::exp(-(b - a).squaredNorm() / (2.0 * h)) / std::pow(2.0 * std::numbers::pi * h, 0.5 * m);
}

// Unit tangent vectors at a point of the circle or sphere.
std::vector<Eigen::VectorXd> tangent_basis(const ManifoldSpec& spec, const Eigen::VectorXd& x) {
  const Eigen::VectorXd n = x.normalized();
  if (spec.kind == ManifoldKind::circle) return {Eigen::Vector2d(-n[1], n[0])};
  Eigen::Vector3d nn(n[0], n[1], n[2]);
  Eigen::Vector3d a = std::abs(nn.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d t1 = (a - a.dot(nn) * nn).normalized();
  const Eigen::Vector3d t2 = nn.cross(t1);
  return {Eigen::VectorXd(t1), Eigen::VectorXd(t2)};
}

// Volume stretch of the linear map diag(d) restricted to the tangent space at x.
double tangential_jacobian(const ManifoldSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
  const auto basis = tangent_basis(spec, x);
  if (basis.size() == 1) return (d.asDiagonal() * basis[0]).norm();
  const Eigen::Vector3d u = d.asDiagonal() * basis[0];
  const Eigen::Vector3d v = d.asDiagonal() * basis[1];
  return u.cross(v).norm();
}

}  // namespace

double transition_density(const TimeScaling& scaling, double s, const PointRef& x, double t,
                          const PointRef& y) {
  require_time_order(s, t);
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "point dimensions differ");
  const int m = static_cast<int>(x.size());
  const Eigen::VectorXd ds = scaling.diag(s, m);
  const Eigen::VectorXd dt = scaling.diag(t, m);
  const double h = t - s;
  const double dist2 = (dt.cwiseProduct(y) - ds.cwiseProduct(x)).squaredNorm();
  return dt.prod() / std::pow(2.0 * std::numbers::pi * h, 0.5 * m) * std::exp(-dist2 / (2.0 * h));
}

ResolutionReport resolution_report(const QuadratureGrid& grid, const TimeScaling& scaling, double s,
                                   double t) {
  require_time_order(s, t);
  const int m = grid.spec().ambient_dim();
  ResolutionReport report;
  report.kernel_width = std::sqrt(t - s) / scaling.max_singular_value(t, m);
  report.max_spacing = grid.max_adjacent_spacing(scaling.diag(t, m));
  report.ok = report.kernel_width >= 3.0 * report.max_spacing;
  return report;
}

void resolution_check(const QuadratureGrid& grid, const TimeScaling& scaling, double s, double t) {
  const ResolutionReport r = resolution_report(grid, scaling, s, t);
  if (!r.ok) {
    throw Error(ErrorCode::KernelUnderResolved,
                "kernel width " + std::to_string(r.kernel_width) + " below 3 x node spacing " +
                    std::to_string(r.max_spacing) + " on [" + std::to_string(s) + ", " +
                    std::to_string(t) + "]");
  }
}

namespace {

// Shared row arithmetic: exponents relative to the row maximum, weighted,
// normalized by an ascending sum. `image` holds sigma(t) x_j column-wise.
void normalized_row(const QuadratureGrid& grid, const Eigen::MatrixXd& image, const Eigen::VectorXd& source,
                    double h, bool include_weights, std::span<double> out) {
  const Eigen::Index n = grid.size();
  const Eigen::Index m = image.rows();
  const double* img = image.data();
  const double* w = grid.weights().data();
  double emax = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    double d2 = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      const double diff = img[j * m + k] - source[k];
      d2 += diff * diff;
    }
    out[j] = -d2 / (2.0 * h);
    emax = std::max(emax, out[j]);
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double v = w[j] * std::exp(out[j] - emax);
    out[j] = include_weights ? v : std::exp(out[j] - emax);
    sum += v;
  }
  const double inv = 1.0 / sum;
  for (Eigen::Index j = 0; j < n; ++j) out[j] *= inv;
}

}  // namespace

GridFunction normalized_manifold_density(const QuadratureGrid& grid, const TimeScaling& scaling, double s,
                                         const PointRef& x, double t) {
  require_on_manifold(grid.spec(), x);
  resolution_check(grid, scaling, s, t);
  const int m = grid.spec().ambient_dim();
  const Eigen::MatrixXd image = scaling.diag(t, m).asDiagonal() * grid.nodes();
  const Eigen::VectorXd source = scaling.diag(s, m).cwiseProduct(x);
  GridFunction out(grid.size());
  normalized_row(grid, image, source, t - s, false, std::span<double>(out.data(), out.size()));
  return out;
}

KernelOperator::KernelOperator(double s, double t, RowMatrix matrix) : s_(s), t_(t), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw Error(ErrorCode::ShapeMismatch, "kernel matrix must be square");
}

GridFunction KernelOperator::apply(const GridFunction& f) const {
  if (f.size() != matrix_.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "grid function length does not match the operator");
  }
  return matrix_ * f;
}

void kernel_row(const QuadratureGrid& grid, const TimeScaling& scaling, double s, double t, Eigen::Index i,
                std::span<double> out) {
  require_time_order(s, t);
  if (out.size() < static_cast<std::size_t>(grid.size())) {
    throw Error(ErrorCode::ShapeMismatch, "row buffer too small");
  }
  const int m = grid.spec().ambient_dim();
  const Eigen::MatrixXd image = scaling.diag(t, m).asDiagonal() * grid.nodes();
  const Eigen::VectorXd source = scaling.diag(s, m).cwiseProduct(grid.nodes().col(i));
  normalized_row(grid, image, source, t - s, true, out);
}

KernelOperator assemble_step_operator(const QuadratureGrid& grid, const TimeScaling& scaling, double s,
                                      double t) {
  resolution_check(grid, scaling, s, t);
  const int m = grid.spec().ambient_dim();
  const Eigen::Index n = grid.size();
  const Eigen::MatrixXd image = scaling.diag(t, m).asDiagonal() * grid.nodes();
  const Eigen::VectorXd ds = scaling.diag(s, m);
  RowMatrix matrix(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const Eigen::VectorXd source = ds.cwiseProduct(grid.nodes().col(ii));
      normalized_row(grid, image, source, t - s, true,
                     std::span<double>(matrix.data() + ii * n, static_cast<std::size_t>(n)));
    }
  });
  return KernelOperator(s, t, std::move(matrix));
}

PushforwardCheck pushforward_identity_check(const QuadratureGrid& grid, const TimeScaling& scaling, double s,
                                            const PointRef& x, double t, const PointFunction& f) {
  require_time_order(s, t);
  const ManifoldSpec& spec = grid.spec();
  require_on_manifold(spec, x);
  const int m = spec.ambient_dim();
  const double h = t - s;
  const Eigen::VectorXd dt = scaling.diag(t, m);
  const Eigen::VectorXd xs = scaling.diag(s, m).cwiseProduct(x);
  const double det_t = dt.prod();

  PushforwardCheck out;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    out.lhs += grid.weights()[j] * transition_density(scaling, s, x, t, grid.node(j)) * f(grid.node(j));
  }

  // Image-side quadrature: nodes on M_t, Riemannian weights of M_t, and the
  // density 1/J of the pushforward of lambda_M with respect to them.
  double pushed = 0.0;
  double literal = 0.0;
  if (scaling.is_scalar()) {
    const double c = dt[0];
    const ManifoldSpec image_spec{spec.kind, std::abs(c) * spec.radius};
    const QuadratureGrid image = build_grid(image_spec, grid.resolution());
    const double jac = std::pow(std::abs(c), spec.intrinsic_dim());
    for (Eigen::Index j = 0; j < image.size(); ++j) {
      const Eigen::VectorXd yt = image.node(j) * (c < 0 ? -1.0 : 1.0);
      const double term = image.weights()[j] * gaussian_density(h, xs, yt) * f(yt / c);
      literal += term;
      pushed += term / jac;
    }
  } else {
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      const Eigen::VectorXd xj = grid.node(j);
      const Eigen::VectorXd yt = dt.cwiseProduct(xj);
      const double jac = tangential_jacobian(spec, xj, dt);
      const double term = grid.weights()[j] * jac * gaussian_density(h, xs, yt) * f(yt.cwiseQuotient(dt));
      literal += term;
      pushed += term / jac;
    }
  }
  out.rhs = det_t * pushed;
  out.literal_rhs = det_t * literal;
  out.abs_diff = std::abs(out.lhs - out.rhs);
  return out;
}

}  // namespace chernoff

#include "chernoff/eigenbasis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chernoff/error.hpp"

namespace chernoff {

namespace {

void check_index(const ManifoldSpec& spec, EigenIndex idx) {
  const bool ok = spec.kind == ManifoldKind::circle
                      ? idx.degree >= 0 && (idx.order == idx.degree || idx.order == -idx.degree)
                      : idx.degree >= 0 && std::abs(idx.order) <= idx.degree;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "invalid eigen index");
}

}  // namespace

void real_spherical_harmonics(int max_degree, double cos_colat, double lon, std::span<double> out) {
  const int L = max_degree;
  if (out.size() < static_cast<std::size_t>((L + 1) * (L + 1))) {
    throw Error(ErrorCode::ShapeMismatch, "output span too small for spherical harmonics");
  }
  const double x = std::clamp(cos_colat, -1.0, 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  // Fully normalized associated Legendre functions (no Condon-Shortley phase),
  // built column by column in m.
  std::vector<double> pmm_col(L + 1);
  double pmm = 0.5 / std::sqrt(std::numbers::pi);
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    double p_prev2 = 0.0;
    double p_prev = pmm;
    const double cm = m == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(m * lon);
    const double sm = m == 0 ? 0.0 : std::numbers::sqrt2 * std::sin(m * lon);
    for (int l = m; l <= L; ++l) {
      double p = 0.0;
      if (l == m) {
        p = pmm;
      } else if (l == m + 1) {
        p = std::sqrt(2.0 * m + 3.0) * x * pmm;
      } else {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
        const double b = std::sqrt((static_cast<double>(l - 1) * (l - 1) - m * m) /
                                   (4.0 * (l - 1) * (l - 1) - 1.0));
        p = a * (x * p_prev - b * p_prev2);
      }
      if (l > m) {
        p_prev2 = p_prev;
        p_prev = p;
      }
      const int base = l * l + l;
      out[base + m] = cm * p;
      if (m > 0) out[base - m] = sm * p;
    }
  }
}

double eigenvalue(const ManifoldSpec& spec, EigenIndex idx) {
  check_index(spec, idx);
  const double r2 = spec.radius * spec.radius;
  const double k = idx.degree;
  return spec.kind == ManifoldKind::circle ? k * k / r2 : k * (k + 1.0) / r2;
}

double eigenfunction(const ManifoldSpec& spec, EigenIndex idx, const PointRef& point) {
  check_index(spec, idx);
  require_on_manifold(spec, point);
  const double r = spec.radius;
  if (spec.kind == ManifoldKind::circle) {
    const double theta = circle_angle(point);
    if (idx.degree == 0) return 1.0 / std::sqrt(2.0 * std::numbers::pi * r);
    const double norm = 1.0 / std::sqrt(std::numbers::pi * r);
    return idx.order > 0 ? norm * std::cos(idx.degree * theta) : norm * std::sin(idx.degree * theta);
  }
  std::vector<double> values((idx.degree + 1) * (idx.degree + 1));
  real_spherical_harmonics(idx.degree, point[2] / point.norm(), longitude(point), values);
  return values[idx.degree * idx.degree + idx.order + idx.degree] / r;
}

EigenBasis::EigenBasis(ManifoldSpec spec, int max_degree) : spec_(spec), max_degree_(max_degree) {
  if (max_degree < 0) throw Error(ErrorCode::InvalidArgument, "max_degree must be >= 0");
  if (spec.kind == ManifoldKind::circle) {
    indices_.push_back({0, 0});
    for (int k = 1; k <= max_degree; ++k) {
      indices_.push_back({k, k});
      indices_.push_back({k, -k});
    }
  } else {
    for (int l = 0; l <= max_degree; ++l) {
      for (int q = -l; q <= l; ++q) indices_.push_back({l, q});
    }
  }
  eigenvalues_.resize(size());
  for (Eigen::Index i = 0; i < size(); ++i) eigenvalues_[i] = eigenvalue(spec_, indices_[i]);
}

int EigenBasis::default_max_degree(const QuadratureGrid& grid) {
  if (grid.spec().kind == ManifoldKind::circle) return grid.resolution().primary / 4;
  return grid.resolution().primary / 2 - 1;
}

Eigen::Index EigenBasis::position(EigenIndex idx) const {
  check_index(spec_, idx);
  if (idx.degree > max_degree_) throw Error(ErrorCode::InvalidArgument, "index above basis cap");
  if (spec_.kind == ManifoldKind::circle) {
    if (idx.degree == 0) return 0;
    return idx.order > 0 ? 2 * idx.degree - 1 : 2 * idx.degree;
  }
  return idx.degree * idx.degree + idx.order + idx.degree;
}

void EigenBasis::evaluate(const PointRef& point, std::span<double> out) const {
  if (out.size() < static_cast<std::size_t>(size())) {
    throw Error(ErrorCode::ShapeMismatch, "output span too small for basis");
  }
  const double r = spec_.radius;
  if (spec_.kind == ManifoldKind::circle) {
    const double theta = std::atan2(point[1], point[0]);
    const double norm = 1.0 / std::sqrt(std::numbers::pi * r);
    out[0] = 1.0 / std::sqrt(2.0 * std::numbers::pi * r);
    for (int k = 1; k <= max_degree_; ++k) {
      out[2 * k - 1] = norm * std::cos(k * theta);
      out[2 * k] = norm * std::sin(k * theta);
    }
    return;
  }
  real_spherical_harmonics(max_degree_, point[2] / point.norm(), std::atan2(point[1], point[0]), out);
  for (Eigen::Index i = 0; i < size(); ++i) out[i] /= r;
}

Eigen::VectorXd EigenBasis::evaluate(const PointRef& point) const {
  Eigen::VectorXd out(size());
  evaluate(point, std::span<double>(out.data(), out.size()));
  return out;
}

Eigen::MatrixXd EigenBasis::evaluate(const QuadratureGrid& grid) const {
  if (!(grid.spec() == spec_)) throw Error(ErrorCode::ShapeMismatch, "grid manifold differs");
  Eigen::MatrixXd out(grid.size(), size());
  Eigen::VectorXd row(size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    evaluate(grid.node(j), std::span<double>(row.data(), row.size()));
    out.row(j) = row.transpose();
  }
  return out;
}

SpectralFunction SpectralFunction::zero(const ManifoldSpec& spec, int max_degree) {
  EigenBasis basis(spec, max_degree);
  return {spec, max_degree, Eigen::VectorXd::Zero(basis.size())};
}

SpectralFunction project(const QuadratureGrid& grid, const GridFunction& values, int max_degree) {
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::ShapeMismatch, "grid function length does not match the grid");
  }
  EigenBasis basis(grid.spec(), max_degree);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(basis.size());
  Eigen::VectorXd row(basis.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    basis.evaluate(grid.node(j), std::span<double>(row.data(), row.size()));
    coeffs += (grid.weights()[j] * values[j]) * row;
  }
  return {grid.spec(), max_degree, std::move(coeffs)};
}

GridFunction synthesize(const SpectralFunction& f, const QuadratureGrid& grid) {
  if (!(grid.spec() == f.spec)) throw Error(ErrorCode::ShapeMismatch, "grid manifold differs");
  const EigenBasis basis = f.basis();
  GridFunction out(grid.size());
  Eigen::VectorXd row(basis.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    basis.evaluate(grid.node(j), std::span<double>(row.data(), row.size()));
    out[j] = row.dot(f.coefficients);
  }
  return out;
}

double evaluate(const SpectralFunction& f, const PointRef& point) {
  return f.basis().evaluate(point).dot(f.coefficients);
}

SpectralFunction laplacian(const SpectralFunction& f) {
  const EigenBasis basis = f.basis();
  return {f.spec, f.max_degree, f.coefficients.cwiseProduct(basis.eigenvalues())};
}

double sup_norm(const SpectralFunction& f, const QuadratureGrid& grid) {
  return synthesize(f, grid).cwiseAbs().maxCoeff();
}

}  // namespace chernoff

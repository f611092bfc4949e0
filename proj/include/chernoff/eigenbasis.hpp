#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "chernoff/manifold.hpp"
#include "chernoff/quadrature.hpp"

namespace chernoff {

/// Laplace-Beltrami eigenfunction label in real form.
///
/// Circle: degree k >= 0 with order +k for cos(k theta) and -k for sin(k theta).
/// Sphere: degree l >= 0 with order -l <= q <= l; q >= 0 carries cos(q lon),
/// q < 0 carries sin(|q| lon).
struct EigenIndex {
  int degree = 0;
  int order = 0;

  friend bool operator==(const EigenIndex&, const EigenIndex&) = default;
};

/// Eigenvalue of the nonnegative Laplacian: k^2/r^2 or l(l+1)/r^2.
double eigenvalue(const ManifoldSpec& spec, EigenIndex idx);

/// L2(M)-orthonormal eigenfunction evaluated at a point of M.
double eigenfunction(const ManifoldSpec& spec, EigenIndex idx, const PointRef& point);

/// Truncated eigenbasis of all indices with degree <= max_degree.
class EigenBasis {
 public:
  EigenBasis(ManifoldSpec spec, int max_degree);

  /// Cap that stays inside the quadrature exactness of the grid:
  /// circle k <= n/4, sphere l <= n_colat/2 - 1.
  static int default_max_degree(const QuadratureGrid& grid);

  const ManifoldSpec& spec() const noexcept { return spec_; }
  int max_degree() const noexcept { return max_degree_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(indices_.size()); }
  const std::vector<EigenIndex>& indices() const noexcept { return indices_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  Eigen::Index position(EigenIndex idx) const;

  /// All basis functions at one point, in index order.
  void evaluate(const PointRef& point, std::span<double> out) const;
  Eigen::VectorXd evaluate(const PointRef& point) const;
  /// Matrix with one row per grid node and one column per basis function.
  Eigen::MatrixXd evaluate(const QuadratureGrid& grid) const;

 private:
  ManifoldSpec spec_;
  int max_degree_;
  std::vector<EigenIndex> indices_;
  Eigen::VectorXd eigenvalues_;
};

/// Band-limited function stored by its eigen-coefficients.
struct SpectralFunction {
  ManifoldSpec spec;
  int max_degree = 0;
  Eigen::VectorXd coefficients;

  static SpectralFunction zero(const ManifoldSpec& spec, int max_degree);
  EigenBasis basis() const { return {spec, max_degree}; }
};

/// Quadrature projection onto the basis up to max_degree.
SpectralFunction project(const QuadratureGrid& grid, const GridFunction& values, int max_degree);
/// Node values of a spectral function.
GridFunction synthesize(const SpectralFunction& f, const QuadratureGrid& grid);
double evaluate(const SpectralFunction& f, const PointRef& point);
/// Nonnegative Laplace-Beltrami operator, applied coefficient-wise.
SpectralFunction laplacian(const SpectralFunction& f);
/// Maximum absolute value over the grid nodes.
double sup_norm(const SpectralFunction& f, const QuadratureGrid& grid);

/// All real spherical harmonics of degree <= max_degree on the unit sphere,
/// orthonormal in L2(S^2); out has (max_degree+1)^2 entries ordered l^2 + q + l.
void real_spherical_harmonics(int max_degree, double cos_colat, double lon, std::span<double> out);

}  // namespace chernoff

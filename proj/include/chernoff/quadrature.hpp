#pragma once

#include <Eigen/Dense>

#include "chernoff/manifold.hpp"

namespace chernoff {

/// Node values of a function on M, one entry per grid node.
using GridFunction = Eigen::VectorXd;

/// Circle: `primary` = node count. Sphere: `primary` = Gauss-Legendre rings in
/// cos(colatitude), `secondary` = uniform longitudes per ring.
struct GridResolution {
  int primary = 0;
  int secondary = 0;
};

/// Nodes and weights discretizing the volume measure of M.
///
/// Nodes are stored column-wise in ambient coordinates. Sphere nodes are
/// ordered ring by ring from the north pole, longitude fastest.
class QuadratureGrid {
 public:
  QuadratureGrid(ManifoldSpec spec, GridResolution resolution, Eigen::MatrixXd nodes,
                 Eigen::VectorXd weights);

  const ManifoldSpec& spec() const noexcept { return spec_; }
  const GridResolution& resolution() const noexcept { return resolution_; }
  Eigen::Index size() const noexcept { return weights_.size(); }
  const Eigen::MatrixXd& nodes() const noexcept { return nodes_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  auto node(Eigen::Index j) const { return nodes_.col(j); }

  /// Largest distance between adjacent nodes after mapping every node by the
  /// diagonal matrix diag(scale). Adjacency is along the circle, or along rings
  /// and meridians on the sphere.
  double max_adjacent_spacing(const Eigen::VectorXd& scale) const;

  /// Index of the node nearest to p.
  Eigen::Index nearest_node(const PointRef& p) const;

 private:
  ManifoldSpec spec_;
  GridResolution resolution_;
  Eigen::MatrixXd nodes_;
  Eigen::VectorXd weights_;
};

/// Circle: uniform angles 2*pi*j/n with weight 2*pi*r/n, n >= 8.
/// Sphere: Gauss-Legendre in cos(colatitude) times uniform longitude, both >= 8.
/// Throws InvalidResolution.
QuadratureGrid build_grid(const ManifoldSpec& spec, GridResolution resolution);

/// Sum of weight_j * f_j. Throws ShapeMismatch.
double integrate(const QuadratureGrid& grid, const GridFunction& f);

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace chernoff

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

#include "chernoff/manifold.hpp"
#include "chernoff/quadrature.hpp"
#include "chernoff/scaling.hpp"

namespace chernoff {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PointFunction = std::function<double(const PointRef&)>;

/// Gaussian transition density of x + sigma(t)^-1 W_t in R^m:
///   det sigma(t) / (2 pi (t-s))^(m/2) * exp(-|sigma(t) y - sigma(s) x|^2 / (2 (t-s))).
/// Throws InvalidTimeOrder unless s < t.
double transition_density(const TimeScaling& scaling, double s, const PointRef& x, double t,
                          const PointRef& y);

struct ResolutionReport {
  double kernel_width = 0.0;  // sqrt(t-s) / max singular value of sigma(t)
  double max_spacing = 0.0;   // largest gap between adjacent image nodes sigma(t) x_j
  bool ok = false;            // kernel_width >= 3 * max_spacing
};

ResolutionReport resolution_report(const QuadratureGrid& grid, const TimeScaling& scaling, double s,
                                   double t);
/// Throws KernelUnderResolved when the kernel is narrower than three node gaps.
void resolution_check(const QuadratureGrid& grid, const TimeScaling& scaling, double s, double t);

/// Values at the grid nodes of the transition density restricted to M and
/// renormalized against the grid weights, so that sum_j w_j p_j = 1.
GridFunction normalized_manifold_density(const QuadratureGrid& grid, const TimeScaling& scaling,
                                         double s, const PointRef& x, double t);

/// One discretized step Q_{s,t}: K(i,j) = w_j p(s,x_i,t,x_j) / sum_j' w_j' p(s,x_i,t,x_j').
class KernelOperator {
 public:
  KernelOperator(double s, double t, RowMatrix matrix);

  double start() const noexcept { return s_; }
  double end() const noexcept { return t_; }
  Eigen::Index size() const noexcept { return matrix_.rows(); }
  const RowMatrix& matrix() const noexcept { return matrix_; }
  std::span<const double> row(Eigen::Index i) const {
    return {matrix_.data() + i * matrix_.cols(), static_cast<std::size_t>(matrix_.cols())};
  }

  /// (Qf)(x_i) = sum_j K(i,j) f(x_j). Throws ShapeMismatch.
  GridFunction apply(const GridFunction& f) const;

 private:
  double s_;
  double t_;
  RowMatrix matrix_;
};

/// Dense assembly of Q_{s,t}. Rows are independent and may be built in
/// parallel; each row is normalized with an ascending-index sum.
KernelOperator assemble_step_operator(const QuadratureGrid& grid, const TimeScaling& scaling, double s,
                                      double t);

/// Fills `out` with row i of Q_{s,t} (same arithmetic as the assembled matrix).
void kernel_row(const QuadratureGrid& grid, const TimeScaling& scaling, double s, double t,
                Eigen::Index i, std::span<double> out);

struct PushforwardCheck {
  double lhs = 0.0;          // integral over M of p(s,x,t,y) f(y)
  double rhs = 0.0;          // det sigma(t) * integral over M_t against the pushforward of lambda_M
  double literal_rhs = 0.0;  // same, against the Riemannian volume of M_t
  double abs_diff = 0.0;     // |lhs - rhs|
};

/// Compares the M-side integral with its image-side form on M_t = sigma(t) M.
/// For scalar scalings the image side uses an independently built grid on the
/// scaled manifold; otherwise the image nodes sigma(t) x_j with tangential
/// Jacobian weights.
PushforwardCheck pushforward_identity_check(const QuadratureGrid& grid, const TimeScaling& scaling,
                                            double s, const PointRef& x, double t,
                                            const PointFunction& f);

}  // namespace chernoff

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace chernoff {

/// Scalar profile c(t) with closed-form derivative:
///   constant     c(t) = a
///   affine       c(t) = a + b t
///   exponential  c(t) = a exp(b t)
struct ScalarProfile {
  enum class Family { constant, affine, exponential };

  Family family = Family::constant;
  double a = 1.0;
  double b = 0.0;

  static ScalarProfile constant(double a) { return {Family::constant, a, 0.0}; }
  static ScalarProfile affine(double a, double b) { return {Family::affine, a, b}; }
  static ScalarProfile exponential(double a, double b) { return {Family::exponential, a, b}; }

  double value(double t) const noexcept;
  double derivative(double t) const noexcept;
  /// Closed form of the integral of c(r)^-2 over [s, t].
  double inverse_square_integral(double s, double t) const;

  std::string describe() const;
};

/// Time-dependent diagonal matrix sigma(t) = diag(c_1(t), ..., c_m(t)).
/// A scalar scaling c(t) I adapts to any ambient dimension.
class TimeScaling {
 public:
  static TimeScaling identity();
  static TimeScaling scalar(ScalarProfile profile);
  static TimeScaling diagonal(std::vector<ScalarProfile> axes);

  bool is_scalar() const noexcept { return scalar_; }
  /// True when sigma does not depend on t.
  bool is_time_invariant() const noexcept;
  /// Throws UnsupportedScaling for diagonal scalings.
  const ScalarProfile& scalar_profile() const;
  const std::vector<ScalarProfile>& axes() const noexcept { return axes_; }

  /// Diagonal entries of sigma(t) for an ambient dimension m.
  Eigen::VectorXd diag(double t, int m) const;
  Eigen::VectorXd diag_derivative(double t, int m) const;
  double det(double t, int m) const;
  double max_singular_value(double t, int m) const;

  /// Throws UnsupportedScaling when det sigma(t) vanishes at one of `samples`
  /// evenly spaced times in [start, end], ShapeMismatch when a diagonal
  /// scaling does not have m axes.
  void check_nondegenerate(double start, double end, int m, int samples = 257) const;

  std::string describe() const;

 private:
  TimeScaling(std::vector<ScalarProfile> axes, bool scalar) : axes_(std::move(axes)), scalar_(scalar) {}

  const ScalarProfile& axis(int i, int m) const;

  std::vector<ScalarProfile> axes_;
  bool scalar_;
};

}  // namespace chernoff

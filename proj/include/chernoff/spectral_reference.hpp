#pragma once

#include <Eigen/Dense>
#include <functional>

#include "chernoff/eigenbasis.hpp"
#include "chernoff/quadrature.hpp"
#include "chernoff/scaling.hpp"

namespace chernoff {

/// Exact backward propagator for sigma(t) = c(t) I on a centered circle or
/// sphere. The left generator is A_t = -Delta_M / (2 c(t)^2) (the drift term
/// vanishes because sigma'(t) x is radial), so the generators commute and
///   U(s,t) = exp(-Delta_M I(s,t) / 2),   I(s,t) = integral of c(r)^-2 over [s,t].
class ScalarGeneratorModel {
 public:
  /// Throws UnsupportedScaling for diagonal scalings.
  explicit ScalarGeneratorModel(const TimeScaling& scaling);

  /// User-supplied c(t); I(s,t) by adaptive Gauss-Kronrod to `tolerance`.
  static ScalarGeneratorModel from_function(std::function<double(double)> c, double tolerance = 1e-13);

  double scale(double t) const { return scale_(t); }
  double inverse_square_integral(double s, double t) const { return integral_(s, t); }

 private:
  ScalarGeneratorModel(std::function<double(double)> scale, std::function<double(double, double)> integral)
      : scale_(std::move(scale)), integral_(std::move(integral)) {}

  std::function<double(double)> scale_;
  std::function<double(double, double)> integral_;
};

/// A_t f: coefficient-wise multiplication by -lambda / (2 c(t)^2).
SpectralFunction generator_apply(const ScalarGeneratorModel& model, double t, const SpectralFunction& f);

/// U(s,t) f: coefficient-wise multiplication by exp(-lambda I(s,t) / 2).
/// Throws InvalidTimeOrder when t < s.
SpectralFunction propagate(const ScalarGeneratorModel& model, double s, double t, const SpectralFunction& f);

/// Largest coefficient deviation between U(s,tau) U(tau,t) f and U(s,t) f.
double propagator_law_check(const ScalarGeneratorModel& model, double s, double tau, double t,
                            const SpectralFunction& f);

/// Largest tangential component of sigma'(t) x on M_t = sigma(t) M over the
/// sample points (columns of `samples`, points of M). Scalar scalings only.
double drift_vanishes(const ManifoldSpec& spec, const TimeScaling& scaling, double t,
                      const Eigen::MatrixXd& samples);

struct FinalValueResidual {
  /// sup |(U(s+d,t)f - U(s-d,t)f) / (2d) + A_s U(s,t) f| over the grid.
  double residual = 0.0;
  /// sup |U(t-d,t) f - f| over the grid and the bound lambda_max I(t-d,t) ||f||_1,
  /// where ||f||_1 sums |coefficient| * sup|basis function|.
  double terminal_deviation = 0.0;
  double terminal_bound = 0.0;
};

/// Checks du/ds = -A_s u with u(s) = U(s,t) f by central differences.
FinalValueResidual final_value_residual(const ScalarGeneratorModel& model, const QuadratureGrid& grid,
                                        double s, double t, const SpectralFunction& f, double delta);

}  // namespace chernoff

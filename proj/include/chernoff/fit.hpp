#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace chernoff {

/// y ~ C x^p fitted by ordinary least squares of log y on log x.
struct PowerLawFit {
  double exponent = 0.0;
  double log_constant = 0.0;
  /// Half width of the 95% confidence interval for the exponent (Student t,
  /// n-2 degrees of freedom); NaN with fewer than three points.
  double exponent_half_width = 0.0;
  std::vector<double> residuals;  // in log space
};

/// Throws InvalidArgument for fewer than two points or non-positive data.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

struct LeastSquaresFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;  // unweighted, rhs - design * coefficients
  double condition = 0.0;     // of the weighted design after column equilibration
};

/// Minimizes sum_i (w_i (rhs_i - (design c)_i))^2 with column-pivoted QR.
LeastSquaresFit weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs,
                                       const Eigen::VectorXd& weights);

/// count values log-spaced over [lo, hi], inclusive.
std::vector<double> log_spaced(double lo, double hi, int count);

}  // namespace chernoff

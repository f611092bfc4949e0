#include "chernoff/fit.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "chernoff/error.hpp"

namespace chernoff {

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "power-law fit needs at least two (x, y) pairs");
  }
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "power-law fit needs positive data");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidArgument, "power-law fit needs distinct x values");

  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.log_constant = my - fit.exponent * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.log_constant + fit.exponent * lx[i]);
    fit.residuals.push_back(r);
    sse += r * r;
  }
  if (n >= 3) {
    const double dof = static_cast<double>(n - 2);
    const double se = std::sqrt(sse / dof / sxx);
    const boost::math::students_t dist(dof);
    fit.exponent_half_width = boost::math::quantile(dist, 0.975) * se;
  } else {
    fit.exponent_half_width = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

LeastSquaresFit weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs,
                                       const Eigen::VectorXd& weights) {
  if (design.rows() != rhs.size() || rhs.size() != weights.size() || design.rows() < design.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "least-squares dimensions are inconsistent");
  }
  const Eigen::MatrixXd wa = weights.asDiagonal() * design;
  const Eigen::VectorXd wb = weights.cwiseProduct(rhs);
  const Eigen::VectorXd scale = wa.colwise().norm().transpose();
  const Eigen::MatrixXd equilibrated = wa * scale.cwiseInverse().asDiagonal();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(equilibrated);
  const auto& sv = svd.singularValues();

  LeastSquaresFit fit;
  fit.condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
  const Eigen::VectorXd scaled = equilibrated.colPivHouseholderQr().solve(wb);
  fit.coefficients = scaled.cwiseQuotient(scale);
  fit.residuals = rhs - design * fit.coefficients;
  return fit;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) {
    throw Error(ErrorCode::InvalidArgument, "log_spaced needs 0 < lo < hi and count >= 2");
  }
  std::vector<double> out(count);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace chernoff

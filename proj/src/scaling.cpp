#include "chernoff/scaling.hpp"

#include <cmath>
#include <sstream>

#include "chernoff/error.hpp"

namespace chernoff {

double ScalarProfile::value(double t) const noexcept {
  switch (family) {
    case Family::constant: return a;
    case Family::affine: return a + b * t;
    case Family::exponential: return a * std::exp(b * t);
  }
  return a;
}

double ScalarProfile::derivative(double t) const noexcept {
  switch (family) {
    case Family::constant: return 0.0;
    case Family::affine: return b;
    case Family::exponential: return a * b * std::exp(b * t);
  }
  return 0.0;
}

double ScalarProfile::inverse_square_integral(double s, double t) const {
  if (s == t) return 0.0;
  switch (family) {
    case Family::constant:
      return (t - s) / (a * a);
    case Family::affine:
      if (b == 0.0) return (t - s) / (a * a);
      // Both endpoints must sit on the same side of the root of a + b r.
      if ((a + b * s) * (a + b * t) <= 0.0) {
        throw Error(ErrorCode::UnsupportedScaling, "affine profile vanishes inside the interval");
      }
      return (t - s) / ((a + b * s) * (a + b * t));
    case Family::exponential:
      if (b == 0.0) return (t - s) / (a * a);
      // expm1 keeps the small-interval case accurate.
      return -std::exp(-2.0 * b * s) * std::expm1(-2.0 * b * (t - s)) / (2.0 * b * a * a);
  }
  return 0.0;
}

std::string ScalarProfile::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family) {
    case Family::constant: os << "constant(" << a << ")"; break;
    case Family::affine: os << "affine(" << a << "+" << b << "t)"; break;
    case Family::exponential: os << "exponential(" << a << "*exp(" << b << "t))"; break;
  }
  return os.str();
}

bool TimeScaling::is_time_invariant() const noexcept {
  for (const ScalarProfile& p : axes_) {
    if (p.family != ScalarProfile::Family::constant && p.b != 0.0) return false;
  }
  return true;
}

TimeScaling TimeScaling::identity() { return scalar(ScalarProfile::constant(1.0)); }

TimeScaling TimeScaling::scalar(ScalarProfile profile) { return TimeScaling({profile}, true); }

TimeScaling TimeScaling::diagonal(std::vector<ScalarProfile> axes) {
  if (axes.empty()) throw Error(ErrorCode::InvalidArgument, "diagonal scaling needs at least one axis");
  return TimeScaling(std::move(axes), false);
}

const ScalarProfile& TimeScaling::scalar_profile() const {
  if (!scalar_) throw Error(ErrorCode::UnsupportedScaling, "scaling is not a scalar multiple of I");
  return axes_.front();
}

const ScalarProfile& TimeScaling::axis(int i, int m) const {
  if (scalar_) return axes_.front();
  if (static_cast<int>(axes_.size()) != m) {
    throw Error(ErrorCode::ShapeMismatch, "diagonal scaling dimension does not match the ambient space");
  }
  return axes_[i];
}

Eigen::VectorXd TimeScaling::diag(double t, int m) const {
  Eigen::VectorXd d(m);
  for (int i = 0; i < m; ++i) d[i] = axis(i, m).value(t);
  return d;
}

Eigen::VectorXd TimeScaling::diag_derivative(double t, int m) const {
  Eigen::VectorXd d(m);
  for (int i = 0; i < m; ++i) d[i] = axis(i, m).derivative(t);
  return d;
}

double TimeScaling::det(double t, int m) const { return diag(t, m).prod(); }

double TimeScaling::max_singular_value(double t, int m) const {
  return diag(t, m).cwiseAbs().maxCoeff();
}

void TimeScaling::check_nondegenerate(double start, double end, int m, int samples) const {
  for (int k = 0; k < samples; ++k) {
    const double t = samples == 1 ? start : start + (end - start) * k / (samples - 1);
    if (!(diag(t, m).cwiseAbs().minCoeff() > 0.0)) {
      throw Error(ErrorCode::UnsupportedScaling, "sigma(t) is singular at t = " + std::to_string(t));
    }
  }
}

std::string TimeScaling::describe() const {
  if (scalar_) return "scalar " + axes_.front().describe();
  std::string out = "diag(";
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (i) out += ", ";
    out += axes_[i].describe();
  }
  return out + ")";
}

}  // namespace chernoff

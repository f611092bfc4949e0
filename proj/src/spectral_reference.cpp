#include "chernoff/spectral_reference.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "chernoff/error.hpp"
#include "chernoff/manifold.hpp"

namespace chernoff {

ScalarGeneratorModel::ScalarGeneratorModel(const TimeScaling& scaling) {
  const ScalarProfile profile = scaling.scalar_profile();
  scale_ = [profile](double t) { return profile.value(t); };
  integral_ = [profile](double s, double t) { return profile.inverse_square_integral(s, t); };
}

ScalarGeneratorModel ScalarGeneratorModel::from_function(std::function<double(double)> c, double tolerance) {
  auto integral = [c, tolerance](double s, double t) {
    if (s == t) return 0.0;
    auto integrand = [&c](double r) {
      const double v = c(r);
      return 1.0 / (v * v);
    };
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, s, t, 30, tolerance);
  };
  return ScalarGeneratorModel(std::move(c), std::move(integral));
}

SpectralFunction generator_apply(const ScalarGeneratorModel& model, double t, const SpectralFunction& f) {
  const double c = model.scale(t);
  const EigenBasis basis = f.basis();
  SpectralFunction out = f;
  out.coefficients = f.coefficients.cwiseProduct(basis.eigenvalues()) * (-0.5 / (c * c));
  return out;
}

SpectralFunction propagate(const ScalarGeneratorModel& model, double s, double t, const SpectralFunction& f) {
  if (t < s) throw Error(ErrorCode::InvalidTimeOrder, "propagate needs s <= t");
  if (s == t) return f;
  const double integral = model.inverse_square_integral(s, t);
  const EigenBasis basis = f.basis();
  SpectralFunction out = f;
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    out.coefficients[i] *= std::exp(-0.5 * basis.eigenvalues()[i] * integral);
  }
  return out;
}

double propagator_law_check(const ScalarGeneratorModel& model, double s, double tau, double t,
                            const SpectralFunction& f) {
  if (!(s <= tau && tau <= t)) throw Error(ErrorCode::InvalidTimeOrder, "expected s <= tau <= t");
  const SpectralFunction composed = propagate(model, s, tau, propagate(model, tau, t, f));
  const SpectralFunction direct = propagate(model, s, t, f);
  return (composed.coefficients - direct.coefficients).cwiseAbs().maxCoeff();
}

double drift_vanishes(const ManifoldSpec& spec, const TimeScaling& scaling, double t,
                      const Eigen::MatrixXd& samples) {
  scaling.scalar_profile();
  const int m = spec.ambient_dim();
  if (samples.rows() != m) throw Error(ErrorCode::ShapeMismatch, "sample points have the wrong dimension");
  const Eigen::VectorXd d = scaling.diag(t, m);
  const Eigen::VectorXd dd = scaling.diag_derivative(t, m);
  const ManifoldSpec image{spec.kind, std::abs(d[0]) * spec.radius};
  double worst = 0.0;
  for (Eigen::Index k = 0; k < samples.cols(); ++k) {
    require_on_manifold(spec, samples.col(k));
    const Eigen::VectorXd base = d.cwiseProduct(samples.col(k));
    const Eigen::VectorXd velocity = dd.cwiseProduct(samples.col(k));
    worst = std::max(worst, project_tangent(image, base, velocity).norm());
  }
  return worst;
}

FinalValueResidual final_value_residual(const ScalarGeneratorModel& model, const QuadratureGrid& grid,
                                        double s, double t, const SpectralFunction& f, double delta) {
  if (!(delta > 0.0) || s + delta > t) {
    throw Error(ErrorCode::InvalidArgument, "final value check needs 0 < delta and s + delta <= t");
  }
  const SpectralFunction plus = propagate(model, s + delta, t, f);
  const SpectralFunction minus = propagate(model, s - delta, t, f);
  const SpectralFunction generator_term = generator_apply(model, s, propagate(model, s, t, f));
  SpectralFunction residual = f;
  residual.coefficients = (plus.coefficients - minus.coefficients) / (2.0 * delta) + generator_term.coefficients;

  FinalValueResidual out;
  out.residual = sup_norm(residual, grid);

  const SpectralFunction near_terminal = propagate(model, t - delta, t, f);
  SpectralFunction gap = f;
  gap.coefficients = near_terminal.coefficients - f.coefficients;
  out.terminal_deviation = sup_norm(gap, grid);

  const EigenBasis basis = f.basis();
  const Eigen::VectorXd basis_sup = basis.evaluate(grid).cwiseAbs().colwise().maxCoeff().transpose();
  const double l1 = f.coefficients.cwiseAbs().dot(basis_sup);
  out.terminal_bound = basis.eigenvalues().maxCoeff() * model.inverse_square_integral(t - delta, t) * l1;
  return out;
}

}  // namespace chernoff

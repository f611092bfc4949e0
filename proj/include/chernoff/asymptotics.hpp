#pragma once

#include <span>
#include <vector>

#include "chernoff/eigenbasis.hpp"
#include "chernoff/quadrature.hpp"

namespace chernoff {

enum class ExpansionSource { unnormalized, normalized };

/// First two coefficients of a short-time expansion a0 + a1 t.
struct ExpansionPrediction {
  double a0 = 0.0;
  double a1 = 0.0;
  ExpansionSource source = ExpansionSource::unnormalized;
};

/// Unnormalized Gaussian integral
///   (2 pi t)^(-d/2) integral over M of g(z) exp(-|z - y|^2 / 2t):
///   a0 = g(y),
///   a1 = -Delta g(y) / 2 - g(y) (scal(y) / 6 + DeltaDelta|. - y|^2 (y) / 16).
ExpansionPrediction predict_unnormalized(const SpectralFunction& g, const PointRef& y);

/// Ratio of the same integral for g and for 1: a0 = g(x), a1 = -Delta g(x) / 2.
ExpansionPrediction predict_normalized(const SpectralFunction& g, const PointRef& x);

struct ExpansionFit {
  double a0 = 0.0;
  double a1 = 0.0;
  double b = 0.0;  // coefficient of the t^(3/2) nuisance term
  /// value - a0 - a1 t ~ K t^q, with q profiled over [0.5, 3] in a joint fit of
  /// a0 + a1 t + K t^q. q is +infinity when the remainder of the main fit is at
  /// rounding level for all but two samples.
  double remainder_constant = 0.0;
  double remainder_exponent = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double residual_norm = 0.0;  // max |value - fitted model|
  double condition = 0.0;
  std::vector<double> t_samples;
  std::vector<double> values;
};

/// Fits a0 + a1 t + b t^(3/2) to (t, value) by least squares weighted with 1/t.
/// Needs at least 6 positive samples spanning a factor of 10. Throws
/// InvalidArgument or IllConditionedFit (condition above 1e8).
ExpansionFit fit_expansion(std::span<const double> t_samples, std::span<const double> values);

/// Evaluates the unnormalized integral at every t and fits it. Every t must
/// pass the resolution check with sigma = I.
ExpansionFit measure_unnormalized(const QuadratureGrid& grid, const GridFunction& g, const PointRef& y,
                                  std::span<const double> t_samples);

/// Same for the normalized ratio.
ExpansionFit measure_normalized(const QuadratureGrid& grid, const GridFunction& g, const PointRef& x,
                                std::span<const double> t_samples);

/// Single evaluations used by the measurements.
double unnormalized_integral(const QuadratureGrid& grid, const GridFunction& g, const PointRef& y, double t);
double normalized_ratio(const QuadratureGrid& grid, const GridFunction& g, const PointRef& x, double t);

/// Passes iff the fitted remainder exponent is at least `threshold`.
bool remainder_exponent_check(const ExpansionFit& fit, double threshold = 1.4);

/// Quadrature mass of (2 pi t)^(-d/2) exp(-|z - y|^2 / 2t) outside the
/// geodesic ball of radius `radius_fraction * r` around y.
double tail_mass(const QuadratureGrid& grid, const PointRef& y, double t, double radius_fraction = 0.5);

/// Largest t in `t_candidates` such that tail_mass(s) <= s^(3/2) for every
/// candidate s <= t; 0 when the smallest candidate already fails.
double tail_threshold_time(const QuadratureGrid& grid, const PointRef& y, std::span<const double> t_candidates,
                           double radius_fraction = 0.5);

}  // namespace chernoff

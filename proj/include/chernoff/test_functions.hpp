#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chernoff/eigenbasis.hpp"
#include "chernoff/manifold.hpp"
#include "chernoff/quadrature.hpp"

namespace chernoff {

/// One factor of a catalog test function.
struct TestFactor {
  enum class Kind { constant, cosine, sine, harmonic };
  Kind kind = Kind::constant;
  double value = 1.0;  // constant only
  int degree = 0;      // k for cos/sin, l for harmonics
  int order = 0;       // q for harmonics
};

/// Product of catalog factors, written as e.g. "cos:1", "const:2.5",
/// "Y:1:0" or "cos:1*sin:2".
///
/// cos:k / sin:k are cos(k theta) and sin(k theta) on the circle. Y:l:q is the
/// real spherical harmonic scaled by sqrt(4 pi / (2l + 1)), so that Y:l:0 is
/// the Legendre polynomial P_l(cos colatitude); Y:1:0 equals z / r.
class TestFunction {
 public:
  static TestFunction parse(std::string_view id);
  static TestFunction constant(double c);

  double operator()(const PointRef& point) const;
  GridFunction on_grid(const QuadratureGrid& grid) const;
  /// Exact spectral representation, obtained by quadrature projection at the
  /// function's own degree (the grid must integrate degree 2 * degree() exactly).
  SpectralFunction to_spectral(const QuadratureGrid& grid) const;

  int degree() const noexcept;
  bool is_constant() const noexcept;
  /// Throws InvalidArgument when a factor does not apply to the manifold kind.
  void check_compatible(const ManifoldSpec& spec) const;
  const std::string& id() const noexcept { return id_; }
  const std::vector<TestFactor>& factors() const noexcept { return factors_; }

 private:
  std::vector<TestFactor> factors_;
  std::string id_;
};

}  // namespace chernoff

#include "chernoff/test_functions.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "chernoff/error.hpp"

namespace chernoff {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

int parse_int(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::InvalidArgument, "bad integer in test function id '" + std::string(whole) + "'");
  }
  return v;
}

double parse_double(std::string_view s, std::string_view whole) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used == str.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "bad number in test function id '" + std::string(whole) + "'");
}

TestFactor parse_factor(std::string_view text, std::string_view whole) {
  const auto parts = split(text, ':');
  TestFactor f;
  if (parts[0] == "const" && parts.size() == 2) {
    f.kind = TestFactor::Kind::constant;
    f.value = parse_double(parts[1], whole);
  } else if ((parts[0] == "cos" || parts[0] == "sin") && parts.size() == 2) {
    f.kind = parts[0] == "cos" ? TestFactor::Kind::cosine : TestFactor::Kind::sine;
    f.degree = parse_int(parts[1], whole);
    if (f.degree < 0 || (f.kind == TestFactor::Kind::sine && f.degree == 0)) {
      throw Error(ErrorCode::InvalidArgument, "invalid circle harmonic in '" + std::string(whole) + "'");
    }
  } else if (parts[0] == "Y" && parts.size() == 3) {
    f.kind = TestFactor::Kind::harmonic;
    f.degree = parse_int(parts[1], whole);
    f.order = parse_int(parts[2], whole);
    if (f.degree < 0 || std::abs(f.order) > f.degree) {
      throw Error(ErrorCode::InvalidArgument, "invalid sphere harmonic in '" + std::string(whole) + "'");
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown test function '" + std::string(whole) + "'");
  }
  return f;
}

double factor_value(const TestFactor& f, const PointRef& p) {
  switch (f.kind) {
    case TestFactor::Kind::constant:
      return f.value;
    case TestFactor::Kind::cosine:
      return std::cos(f.degree * std::atan2(p[1], p[0]));
    case TestFactor::Kind::sine:
      return std::sin(f.degree * std::atan2(p[1], p[0]));
    case TestFactor::Kind::harmonic: {
      const int l = f.degree;
      std::vector<double> y((l + 1) * (l + 1));
      real_spherical_harmonics(l, p[2] / p.norm(), std::atan2(p[1], p[0]), y);
      return std::sqrt(4.0 * std::numbers::pi / (2.0 * l + 1.0)) * y[l * l + f.order + l];
    }
  }
  return 0.0;
}

}  // namespace

TestFunction TestFunction::parse(std::string_view id) {
  if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty test function id");
  TestFunction fn;
  for (std::string_view part : split(id, '*')) fn.factors_.push_back(parse_factor(part, id));
  fn.id_ = std::string(id);
  return fn;
}

TestFunction TestFunction::constant(double c) {
  TestFunction fn;
  fn.factors_.push_back({TestFactor::Kind::constant, c, 0, 0});
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, c);
  fn.id_ = "const:" + std::string(buf, ptr);
  return fn;
}

double TestFunction::operator()(const PointRef& point) const {
  double v = 1.0;
  for (const auto& f : factors_) v *= factor_value(f, point);
  return v;
}

GridFunction TestFunction::on_grid(const QuadratureGrid& grid) const {
  check_compatible(grid.spec());
  GridFunction out(grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) out[j] = (*this)(grid.node(j));
  return out;
}

SpectralFunction TestFunction::to_spectral(const QuadratureGrid& grid) const {
  return project(grid, on_grid(grid), degree());
}

int TestFunction::degree() const noexcept {
  int d = 0;
  for (const auto& f : factors_) d += f.degree;
  return d;
}

bool TestFunction::is_constant() const noexcept { return degree() == 0; }

void TestFunction::check_compatible(const ManifoldSpec& spec) const {
  for (const auto& f : factors_) {
    const bool circle_only = f.kind == TestFactor::Kind::cosine || f.kind == TestFactor::Kind::sine;
    const bool sphere_only = f.kind == TestFactor::Kind::harmonic;
    if ((circle_only && spec.kind != ManifoldKind::circle) ||
        (sphere_only && spec.kind != ManifoldKind::sphere)) {
      throw Error(ErrorCode::InvalidArgument, "test function '" + id_ + "' does not apply to this manifold");
    }
  }
}

}  // namespace chernoff

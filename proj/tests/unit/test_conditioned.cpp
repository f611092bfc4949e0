#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "chernoff/conditioned.hpp"
#include "chernoff/error.hpp"
#include "chernoff/parallel.hpp"

using namespace chernoff;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

const TimeScaling kIdentity = TimeScaling::identity();

const QuadratureGrid& circle512() {
  static const QuadratureGrid grid = build_grid(ManifoldSpec::circle(1), {512, 0});
  return grid;
}

std::vector<TestFunction> factors(std::initializer_list<const char*> ids) {
  std::vector<TestFunction> out;
  for (const char* id : ids) out.push_back(TestFunction::parse(id));
  return out;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42), b(42), c = Rng::for_stream(42, 1);
  CHECK(a.seed() == 42);
  CHECK(c.stream() == 1);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);
  Rng u(3);
  double sum = 0.0, lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(sum / 100000 - 0.5) <= 3 * std::sqrt(1.0 / 12 / 100000));
}

TEST_CASE("categorical draws follow the weights") {
  const std::vector<double> probs{0.1, 0.0, 0.6, 0.3};
  Rng rng(11);
  std::vector<std::int64_t> counts(4, 0);
  for (int i = 0; i < 100000; ++i) ++counts[static_cast<std::size_t>(sample_categorical(probs, rng))];
  CHECK(counts[1] == 0);
  const auto chi = chi_square_gof(counts, Eigen::Vector4d(0.1, 0.0, 0.6, 0.3));
  CHECK(chi.p_value > 0.001);

  const std::vector<std::int64_t> exact{100, 200, 700};
  const auto perfect = chi_square_gof(exact, Eigen::Vector3d(0.1, 0.2, 0.7));
  CHECK(perfect.statistic == doctest::Approx(0.0));
  CHECK(perfect.dof == 2);
  CHECK(perfect.p_value == doctest::Approx(1.0));
}

TEST_CASE("one step mean matches the Bessel ratio") {
  // I1(20) / I0(20) = 0.9746705078898070 (mpmath)
  const auto& grid = circle512();
  const Eigen::Index x0 = 37;
  const KernelOperator q = assemble_step_operator(grid, kIdentity, 0.0, 0.05);
  CHECK(std::abs(q.matrix().row(x0).sum() - 1.0) <= 1e-14);
  const GridFunction cos = TestFunction::parse("cos:1").on_grid(grid);
  const double exact = q.apply(cos)[x0];
  CHECK(exact == doctest::Approx(0.9746705078898070 * cos[x0]).epsilon(1e-10));

  Rng rng(2024);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = cos[sample_step(grid, kIdentity, 0.0, x0, 0.05, rng)];
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double stderr_ = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - exact) <= 3 * stderr_);

  Rng r1(5), r2(5);
  CHECK(sample_step(grid, kIdentity, 0.0, x0, 0.05, r1) == sample_step(grid, kIdentity, 0.0, x0, 0.05, r2));
}

TEST_CASE("skeletons") {
  const auto& grid = circle512();
  const Partition p = uniform_partition(0, 1, 16);
  Rng r1(9), r2(9);
  const auto a = sample_skeleton(grid, kIdentity, p, 3, r1);
  const auto b = sample_skeleton(grid, kIdentity, p, 3, r2);
  CHECK(a.nodes == b.nodes);
  CHECK(a.times == p.times());
  REQUIRE(a.nodes.size() == 17);
  CHECK(a.nodes.front() == 3);
  for (auto node : a.nodes) {
    CHECK(node >= 0);
    CHECK(node < grid.size());
  }
  CHECK(a.seed == 9);
}

TEST_CASE("batched sampler reproduces per-path skeletons") {
  const auto& grid = circle512();
  const Partition p = uniform_partition(0, 1, 8);
  const std::vector<int> record{0, 3, 8};
  const auto affine = TimeScaling::scalar(ScalarProfile::affine(1, 1));
  for (const auto& scaling : {kIdentity, affine}) {
    set_thread_count(1);
    const auto serial = sample_positions(grid, scaling, p, 100, 77, 64, record);
    set_thread_count(4);
    const auto threaded = sample_positions(grid, scaling, p, 100, 77, 64, record);
    set_thread_count(1);
    CHECK(serial == threaded);
    for (std::int64_t path = 0; path < 64; ++path) {
      Rng rng = Rng::for_stream(77, static_cast<std::uint64_t>(path));
      const auto skeleton = sample_skeleton(grid, scaling, p, 100, rng);
      for (std::size_t k = 0; k < record.size(); ++k) {
        CHECK(serial[static_cast<std::size_t>(path) * record.size() + k] ==
              skeleton.nodes[static_cast<std::size_t>(record[k])]);
      }
    }
  }
}

TEST_CASE("skeleton marginal matches the kernel product row") {
  const auto grid = build_grid(ManifoldSpec::circle(1), {256, 0});
  const Partition p = uniform_partition(0, 0.5, 8);
  const Eigen::VectorXd law = chain_marginal(grid, kIdentity, p, 0, 8);
  CHECK(std::abs(law.sum() - 1.0) <= 1e-13);
  CHECK(law.minCoeff() >= 0.0);

  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(grid.size());
  row[0] = 1.0;
  for (int j = 0; j < 8; ++j) {
    row = row * assemble_step_operator(grid, kIdentity, p.times()[j], p.times()[j + 1]).matrix();
  }
  CHECK((row.transpose() - law).cwiseAbs().maxCoeff() <= 1e-14);

  const std::vector<int> record{8};
  const auto positions = sample_positions(grid, kIdentity, p, 0, 123, 100000, record);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(grid.size()), 0);
  for (auto node : positions) ++counts[static_cast<std::size_t>(node)];
  const auto chi = chi_square_gof(counts, law);
  CHECK(chi.dof > 10);
  CHECK(chi.p_value > 0.001);
}

TEST_CASE("partition indices") {
  const Partition p = uniform_partition(0, 1, 4);
  const std::vector<double> times{0.5, 1.0};
  CHECK(partition_indices(p, times) == std::vector<int>{2, 4});
  const std::vector<double> off{0.5, 0.6};
  CHECK(code_of([&] { partition_indices(p, off); }) == ErrorCode::TimesNotInPartition);
  const std::vector<double> reversed{1.0, 0.5};
  CHECK(code_of([&] { partition_indices(p, reversed); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("chain and diffusion references") {
  const auto& grid = circle512();
  const Partition p = uniform_partition(0, 1, 128);

  const std::vector<double> one_time{1.0};
  const auto cos = factors({"cos:1"});
  // (I1(128) / I0(128))^128 = 0.6053386270270910 (mpmath)
  const double a1 = fdd_reference_chain(grid, kIdentity, p, 0, one_time, cos);
  const double b1 = fdd_reference_diffusion(grid, kIdentity, p, 0, one_time, cos);
  CHECK(a1 == doctest::Approx(0.6053386270270910).epsilon(1e-10));
  CHECK(b1 == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(std::abs(a1 - b1) <= 1e-2);

  const std::vector<double> two_times{0.5, 1.0};
  const auto cc = factors({"cos:1", "cos:1"});
  // e^{-1/4} (1 + e^{-1}) / 2 = 0.5326527899657967 (mpmath)
  const double a2 = fdd_reference_chain(grid, kIdentity, p, 0, two_times, cc);
  const double b2 = fdd_reference_diffusion(grid, kIdentity, p, 0, two_times, cc);
  CHECK(b2 == doctest::Approx(0.5326527899657967).epsilon(1e-12));
  CHECK(std::abs(a2 - b2) <= 1e-2);

  const auto constants = factors({"const:2", "const:1.5"});
  CHECK(fdd_reference_chain(grid, kIdentity, p, 0, two_times, constants) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(fdd_reference_diffusion(grid, kIdentity, p, 0, two_times, constants) == doctest::Approx(3.0).epsilon(1e-13));

  const auto diag = TimeScaling::diagonal({ScalarProfile::affine(1, 1), ScalarProfile::constant(1)});
  const auto grid1024 = build_grid(ManifoldSpec::circle(1), {1024, 0});
  CHECK(code_of([&] { fdd_reference_diffusion(grid1024, diag, uniform_partition(0, 1, 16), 0, one_time, cos); }) ==
        ErrorCode::UnsupportedScaling);
}

TEST_CASE("chain approaches the diffusion as the partition refines") {
  const auto& grid = circle512();
  const std::vector<double> times{0.5, 1.0};
  const auto cc = factors({"cos:1", "cos:1"});
  double previous = 1.0;
  for (int n : {16, 64, 256}) {
    const Partition p = uniform_partition(0, 1, n);
    const double gap = std::abs(fdd_reference_chain(grid, kIdentity, p, 0, times, cc) -
                                fdd_reference_diffusion(grid, kIdentity, p, 0, times, cc));
    CHECK(gap < previous);
    previous = gap;
  }
}

TEST_CASE("Monte Carlo estimates") {
  const auto& grid = circle512();
  const Partition p = uniform_partition(0, 1, 32);
  const std::vector<double> times{0.5, 1.0};

  const auto constants = factors({"const:2", "const:0.5"});
  const auto flat = fdd_estimate(grid, kIdentity, p, 5, times, constants, 10000, 1);
  CHECK(flat.mc_mean == 1.0);
  CHECK(flat.mc_stderr == 0.0);
  CHECK(flat.z_score == 0.0);

  const auto cc = factors({"cos:1", "cos:1"});
  const auto small = fdd_estimate(grid, kIdentity, p, 0, times, cc, 20000, 8);
  const auto large = fdd_estimate(grid, kIdentity, p, 0, times, cc, 40000, 8);
  CHECK(large.mc_stderr / small.mc_stderr == doctest::Approx(1 / std::sqrt(2.0)).epsilon(0.15));
  CHECK(small.function_id == "cos:1|cos:1");
  CHECK(small.paths == 20000);
  CHECK(std::abs(small.mc_mean - small.reference_diffusion) <=
        std::abs(small.reference_chain - small.reference_diffusion) + 3 * small.mc_stderr);

  int passing = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    if (fdd_estimate(grid, kIdentity, p, 0, times, cc, 10000, 1000 + seed).z_score <= 3.0) ++passing;
  }
  CHECK(passing >= 19);

  CHECK(code_of([&] { fdd_estimate(grid, kIdentity, p, 0, times, cc, 9999, 1); }) == ErrorCode::InvalidArgument);
  const std::vector<double> off{0.5, 0.51};
  CHECK(code_of([&] { fdd_estimate(grid, kIdentity, p, 0, off, cc, 10000, 1); }) == ErrorCode::TimesNotInPartition);
}

TEST_CASE("off-partition density") {
  const auto& grid = circle512();
  const Eigen::Vector2d z(1, 0);
  const double r = 0.5, tau = 0.55, ti = 0.6;

  // Literal evaluation of p(r,z,tau,y) int p(tau,y,ti,.) / int p(r,z,ti,.).
  const auto literal = [&](const Eigen::Vector2d& y) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      num += grid.weights()[j] * transition_density(kIdentity, tau, y, ti, grid.node(j));
      den += grid.weights()[j] * transition_density(kIdentity, r, z, ti, grid.node(j));
    }
    return transition_density(kIdentity, r, z, tau, y) * num / den;
  };
  for (const Eigen::Vector2d& y : {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.9, 0.2), Eigen::Vector2d(1.3, -0.1)}) {
    const double v = off_partition_density(grid, kIdentity, r, z, tau, ti, y);
    CHECK(v >= 0.0);
    CHECK(v == doctest::Approx(literal(y)).epsilon(1e-12));
    const double mirrored = off_partition_density(grid, kIdentity, r, z, tau, ti, Eigen::Vector2d(y[0], -y[1]));
    CHECK(std::abs(v - mirrored) <= 1e-12 * std::max(1.0, v));
  }

  CHECK(std::abs(off_partition_mass(grid, kIdentity, r, z, tau, ti) - 1.0) <= 1e-3);
  const auto affine = TimeScaling::scalar(ScalarProfile::affine(1, 1));
  CHECK(std::abs(off_partition_mass(grid, affine, r, z, tau, ti) - 1.0) <= 1e-3);

  CHECK(code_of([&] { off_partition_density(grid, kIdentity, r, z, 0.7, ti, z); }) == ErrorCode::InvalidTimeOrder);
  CHECK(code_of([&] { off_partition_density(grid, kIdentity, r, z, r, ti, z); }) == ErrorCode::InvalidTimeOrder);
}

TEST_CASE("shell expectations converge to the manifold density") {
  const auto& grid = circle512();
  const Eigen::Vector2d x(1, 0);
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};

  const auto flat = shell_density_limit(grid, kIdentity, 0, x, 0.1, eps, GridFunction::Ones(grid.size()));
  for (const auto& row : flat) {
    CHECK(std::abs(row.shell - 1.0) <= 1e-14);
    CHECK(std::abs(row.limit - 1.0) <= 1e-14);
  }

  const auto rows = shell_density_limit(grid, kIdentity, 0, x, 0.1, eps, TestFunction::parse("cos:1").on_grid(grid));
  REQUIRE(rows.size() == 4);
  // I1(10) / I0(10) = 0.9485998259548460 (mpmath)
  CHECK(rows[0].limit == doctest::Approx(0.9485998259548460).epsilon(1e-10));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].deviation < rows[i - 1].deviation);
  CHECK(rows.back().deviation <= 1e-3);

  const std::vector<double> thick{0.5, 0.1};
  CHECK(code_of([&] { shell_density_limit(grid, kIdentity, 0, x, 0.1, thick, GridFunction::Ones(grid.size())); }) ==
        ErrorCode::ShellTooThick);
  const std::vector<double> ascending{0.05, 0.1, 0.2};
  CHECK(code_of([&] { shell_density_limit(grid, kIdentity, 0, x, 0.1, ascending, GridFunction::Ones(grid.size())); }) ==
        ErrorCode::InvalidArgument);
}

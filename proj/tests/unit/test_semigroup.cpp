#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "stabcert/error.hpp"
#include "stabcert/projection.hpp"
#include "stabcert/quadrature.hpp"
#include "stabcert/semigroup.hpp"

using namespace stabcert;

namespace {
LtiSystem scalar(double a, double b) {
  return build_system(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b));
}
}  // namespace

TEST_CASE("gauss-legendre quadrature integrates polynomials exactly") {
  const QuadratureSpec spec{1, 6, false, 1e-12, 10};
  const auto r = integrate([](double x) { return std::pow(x, 11) - 3 * x * x; }, -1.0, 2.0, spec);
  CHECK(r.value == doctest::Approx((std::pow(2.0, 12) - 1.0) / 12.0 - 9.0).epsilon(1e-13));

  const auto adaptive = integrate([](double x) { return std::exp(-x * x); }, 0.0, 5.0, QuadratureSpec{});
  CHECK(adaptive.value == doctest::Approx(std::sqrt(M_PI) / 2 * std::erf(5.0)).epsilon(1e-12));

  QuadratureSpec bad;
  bad.panels = 0;
  CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("propagate") {
  Matrix a(2, 2);
  a << -1, 0, 0, -2;
  const LtiSystem s = build_system(a, Matrix::Ones(2, 1));
  const Vector y = propagate(s, 1.0, Vector::Ones(2));
  CHECK(y(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(y(1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));

  Matrix j(2, 2);
  j << 0, 1, 0, 0;
  const LtiSystem js = build_system(j, Matrix::Ones(2, 1));
  Vector x(2);
  x << 0, 1;
  const Vector jy = propagate(js, 3.0, x);
  CHECK(jy(0) == doctest::Approx(3.0));
  CHECK(jy(1) == doctest::Approx(1.0));
  const Vector adj = propagate(js, 3.0, Vector::Unit(2, 0), true);
  CHECK(adj(1) == doctest::Approx(3.0));

  CHECK(propagate(s, 0.0, Vector::Ones(2)).isApprox(Vector::Ones(2)));
  CHECK_THROWS_AS(propagate(s, 1.0, Vector::Ones(3)), DimensionError);
  CHECK_THROWS_AS(propagate(s, -1.0, Vector::Ones(2)), DomainError);
}

TEST_CASE("expm agrees with a Taylor oracle and satisfies the semigroup law") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = oracle::random_matrix(rng, 4, 4);
    for (double t : {0.1, 1.0, 3.0}) {
      const Matrix e = expm(a, t);
      const Matrix ref = oracle::taylor_expm(a, t);
      CHECK((e - ref).norm() <= 1e-10 * std::max(1.0, ref.norm()));
    }
    const Matrix st = expm(a, 0.7) * expm(a, 1.1);
    CHECK((st - expm(a, 1.8)).norm() <= 1e-10 * std::max(1.0, st.norm()));
  }
  const Matrix d = Vector::LinSpaced(3, -3.0, 1.0).asDiagonal();
  CHECK(expm(d, 2.0).isApprox(oracle::taylor_expm(d, 2.0), 1e-13));
}

TEST_CASE("observation energy closed forms") {
  CHECK(observation_energy(scalar(0.0, 1.0), 2.0, Vector::Ones(1)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(observation_energy(scalar(-1.0, 1.0), 1.0, Vector::Ones(1)) ==
        doctest::Approx((1 - std::exp(-2.0)) / 2).epsilon(1e-12));
  CHECK(observation_energy(scalar(-1.0, 0.0), 1.0, Vector::Ones(1)) == 0.0);
}

TEST_CASE("gramian examples") {
  CHECK(observability_gramian(scalar(0.0, 1.0), 3.0).matrix(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(observability_gramian(scalar(1.0, 2.0), 1.0).matrix(0, 0) ==
        doctest::Approx(2 * (std::exp(2.0) - 1)).epsilon(1e-14));

  Matrix a(2, 2);
  a << -1, 0, 0, -2;
  const LtiSystem d = build_system(a, Matrix::Ones(2, 1));
  const Matrix g = observability_gramian(d, 1.0).matrix;
  CHECK(g(0, 1) == doctest::Approx((1 - std::exp(-3.0)) / 3).epsilon(1e-14));
  CHECK(g(0, 0) == doctest::Approx((1 - std::exp(-2.0)) / 2).epsilon(1e-14));
  CHECK(g(1, 1) == doctest::Approx((1 - std::exp(-4.0)) / 4).epsilon(1e-14));

  const Matrix gq = observability_gramian(d, 1.0, {}, GramianMethod::quadrature).matrix;
  CHECK((gq - g).norm() <= 1e-12 * g.norm());
  CHECK(exp_ratio(0.0, 2.0) == 2.0);
  CHECK(exp_ratio(1e-12, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gramian invariants on random systems") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    const Matrix a = oracle::random_matrix(rng, 4, 4, 0.5);
    const Matrix b = oracle::random_matrix(rng, 4, 2);
    const LtiSystem s = build_system(a, b);
    const Matrix g1 = observability_gramian(s, 1.0).matrix;
    const Matrix g2 = observability_gramian(s, 2.0).matrix;
    CHECK((g1 - g1.transpose()).norm() <= 1e-14 * g1.norm());
    Eigen::SelfAdjointEigenSolver<Matrix> e1(g1), e12(g2 - g1);
    CHECK(e1.eigenvalues().minCoeff() >= -1e-12 * g1.norm());
    CHECK(e12.eigenvalues().minCoeff() >= -1e-12 * g2.norm());

    // Gram form matches the scalar energy and a Simpson oracle.
    for (int k = 0; k < 3; ++k) {
      const Vector phi = oracle::random_vector(rng, 4);
      const double quad = observation_energy(s, 1.0, phi);
      const double gram = phi.dot(g1 * phi);
      CHECK(gram == doctest::Approx(quad).epsilon(1e-9));
      const double simpson = oracle::simpson(
          [&](double t) { return (b.transpose() * oracle::taylor_expm(a.transpose(), t) * phi).squaredNorm(); },
          0.0, 1.0, 2000);
      CHECK(gram == doctest::Approx(simpson).epsilon(1e-9));
    }
  }
}

TEST_CASE("dissipative tail check") {
  const SpectralSystem heat = point_control_heat(0.3, 0.0, 12);
  const ProjectionFamily fam = spectral_projection_family(heat, first_modes_rule(), 8);
  const TailCheckReport rep = dissipative_tail_check(heat, fam, {0.0, 0.01, 0.1, 0.5}, 50);
  CHECK(rep.violations == 0);
  CHECK(rep.worst_ratio <= 1.0 + 1e-12);
  CHECK(rep.evaluations > 0);

  ProjectionFamily bad = fam;
  for (auto& a : bad.alpha_k) a *= 2.0;
  const TailCheckReport worse = dissipative_tail_check(heat, bad, {0.1, 0.5}, 50);
  CHECK(worse.violations > 0);
  CHECK(worse.worst_ratio > 1.0);

  // A vector with only the first k modes has no tail.
  const Vector phi = Vector::Unit(12, 0);
  CHECK(tail_ratio(heat, fam, 1, 0.2, phi) == 0.0);
}

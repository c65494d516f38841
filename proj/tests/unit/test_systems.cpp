#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stabcert/error.hpp"
#include "stabcert/projection.hpp"
#include "stabcert/systems.hpp"

using namespace stabcert;
using std::numbers::pi;

TEST_CASE("build_system validates shapes and entries") {
  const LtiSystem s = build_system(Matrix::Zero(1, 1), Matrix::Ones(1, 1));
  CHECK(s.states() == 1);
  CHECK(s.inputs() == 1);

  Matrix a(2, 2);
  a << -1, 0, 0, -2;
  Matrix b(2, 1);
  b << 1, 0;
  const LtiSystem d = build_system(a, b);
  CHECK(d.states() == 2);
  CHECK(d.inputs() == 1);
  CHECK(d.is_diagonal());

  CHECK_THROWS_AS(build_system(Matrix::Zero(3, 3), Matrix::Zero(2, 1)), DimensionError);
  Matrix bad = Matrix::Zero(1, 1);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(build_system(bad, Matrix::Ones(1, 1)), Error);
}

TEST_CASE("truncate keeps leading modes and records the cut") {
  const SpectralSystem heat = point_control_heat(0.3, 1.0, 50);
  const LtiSystem full = truncate(heat, 50);
  CHECK(full.a().isApprox(heat.to_lti().a()));
  CHECK(full.b().isApprox(heat.to_lti().b()));

  const double x0 = 1.0 / std::numbers::sqrt2;
  const double c = 3.0;
  const LtiSystem one = truncate(point_control_heat(x0, c, 10), 1);
  CHECK(one.a()(0, 0) == doctest::Approx(-pi * pi + c).epsilon(1e-14));
  // Orthonormal basis: the row carries sqrt2 sin(pi x0).
  CHECK(one.b()(0, 0) == doctest::Approx(std::numbers::sqrt2 * std::sin(pi * x0)).epsilon(1e-14));
  CHECK(one.label().find("1..1") != std::string::npos);

  CHECK_THROWS_AS(truncate(heat, 0), DomainError);
  CHECK_THROWS_AS(truncate(heat, 51), DomainError);

  const SpectralSystem five = truncate_modes(truncate_modes(heat, 20), 5);
  CHECK(five.to_lti().a().isApprox(truncate(heat, 5).a()));
  CHECK(five.control_rows.isApprox(truncate_modes(heat, 5).control_rows));
}

TEST_CASE("point control heat spectrum and rows") {
  const SpectralSystem half = point_control_heat(0.5, 0.0, 4);
  CHECK(std::abs(half.control_rows(1, 0)) < 1e-15);
  CHECK(std::abs(half.control_rows(3, 0)) < 1e-15);

  const SpectralSystem unstable = point_control_heat(0.5, 2 * pi * pi, 3);
  CHECK(unstable.eigenvalues(0) == doctest::Approx(pi * pi));

  const SpectralSystem irr = point_control_heat(1.0 / std::numbers::sqrt2, 0.0, 40);
  for (Eigen::Index j = 0; j < irr.modes(); ++j) CHECK(std::abs(irr.control_rows(j, 0)) > 1e-3);

  // Row j vanishes exactly when j x0 is an integer.
  const SpectralSystem third = point_control_heat(1.0 / 3.0, 0.0, 9);
  for (Eigen::Index j = 0; j < 9; ++j) {
    const bool integer = (j + 1) % 3 == 0;
    CHECK((std::abs(third.control_rows(j, 0)) < 1e-12) == integer);
  }
  CHECK_THROWS_AS(point_control_heat(0.0, 0.0, 3), DomainError);
  CHECK_THROWS_AS(point_control_heat(1.0, 0.0, 3), DomainError);
}

TEST_CASE("hermite heat") {
  const SpectralSystem whole = hermite_heat(1.0, {{-1e3, 1e3}}, 6);
  CHECK(whole.control_rows.isApprox(Matrix::Identity(6, 6), 1e-10));
  CHECK(whole.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(whole.eigenvalues(3) == doctest::Approx(-6.0));

  const SpectralSystem half = hermite_heat(1.0, {{0.0, 1e3}}, 6);
  CHECK(half.control_rows(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  // Parity: h_j h_k is odd when j + k is odd, so the half-line Gram is
  // 1/2 on the diagonal and symmetric.
  for (int j = 0; j < 6; ++j) CHECK(half.control_rows(j, j) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half.control_rows.isApprox(half.control_rows.transpose()));

  CHECK_THROWS(hermite_heat(1.0, {}, 4));
  CHECK_THROWS_AS(hermite_heat(0.5, {{0.0, 1.0}}, 4), DomainError);
}

TEST_CASE("hermite functions are orthonormal") {
  // Trapezoid on a fine grid; Gaussian decay makes it spectrally accurate.
  const int n = 8;
  Matrix gram = Matrix::Zero(n, n);
  const double h = 0.01;
  for (double x = -15.0; x <= 15.0; x += h) {
    const Vector v = hermite_functions(x, n);
    gram += h * v * v.transpose();
  }
  CHECK(gram.isApprox(Matrix::Identity(n, n), 1e-10));
}

TEST_CASE("fractional heat") {
  const SpectralSystem f = fractional_heat(0.5, 2.0, {{0.2, 0.6}}, 5);
  CHECK(f.eigenvalues(0) == doctest::Approx(2.0 - std::sqrt(pi)).epsilon(1e-14));
  CHECK(f.eigenvalues(0) == doctest::Approx(0.2275).epsilon(1e-3));

  const SpectralSystem s1 = fractional_heat(0.999999999, 1.0, {{0.0, 1.0}}, 3);
  CHECK(s1.eigenvalues(2) == doctest::Approx(1.0 - 3 * pi).epsilon(1e-7));
  CHECK(s1.control_rows.isApprox(Matrix::Identity(3, 3), 1e-12));

  // Closed-form entries against midpoint quadrature of 2 sin(j pi x) sin(k pi x).
  const int m = 200000;
  for (int j = 1; j <= 3; ++j) {
    for (int k = 1; k <= 3; ++k) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) {
        const double x = 0.2 + (i + 0.5) * 0.4 / m;
        s += 2.0 * std::sin(j * pi * x) * std::sin(k * pi * x) * 0.4 / m;
      }
      CHECK(f.control_rows(j - 1, k - 1) == doctest::Approx(s).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(fractional_heat(1.5, 0.0, {{0.2, 0.6}}, 3), DomainError);
}

TEST_CASE("continued fraction actuator point") {
  const ContinuedFractionX0 cf = continued_fraction_x0(3);
  REQUIRE(cf.q.size() >= 4);
  CHECK(*cf.partial_quotients[0] == 0u);
  CHECK(*cf.partial_quotients[1] == 2u);
  CHECK(*cf.q[0] == 0u);
  CHECK(*cf.q[1] == 1u);
  CHECK(*cf.q[2] == 2u);
  CHECK(*cf.partial_quotients[2] == 2981u);
  CHECK(*cf.q[3] == 5963u);
  CHECK_FALSE(cf.partial_quotients[3].has_value());
  CHECK(cf.log_partial_quotients[3] == doctest::Approx(5963.0 * 5963.0 * 5963.0));
  REQUIRE(cf.convergents.size() == 3);
  CHECK(cf.convergents[2].p == 2981u);
  CHECK(cf.convergents[2].q == 5963u);
  for (std::size_t i = 2; i < cf.log_q.size(); ++i) CHECK(cf.log_q[i] > cf.log_q[i - 1]);
  CHECK(cf.value == doctest::Approx(2981.0 / 5963.0).epsilon(1e-15));

  // Deeper expansions switch to logarithms and report +inf from a_4 on.
  const ContinuedFractionX0 deep = continued_fraction_x0(5);
  CHECK(std::isinf(deep.log_partial_quotients[5]));
}

TEST_CASE("unbounded constants spec validation") {
  UnboundedConstantsSpec ok;
  CHECK_NOTHROW(validate(ok));
  UnboundedConstantsSpec bad = ok;
  bad.gamma = 0.5;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad.gamma = 0.0;
  CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("spectral projection family") {
  SpectralSystem lin;
  lin.eigenvalues = -Vector::LinSpaced(8, 1.0, 8.0);
  lin.control_rows = Matrix::Ones(8, 1);
  const ProjectionFamily fam = spectral_projection_family(lin, first_modes_rule(), 6);
  for (int k = 1; k <= 6; ++k) {
    CHECK(fam.alpha_k[k - 1] == doctest::Approx(k + 1.0));
    CHECK(fam.m_k[k - 1] == 1.0);
    const Matrix p = fam.matrix(k, 8);
    CHECK((p * p).isApprox(p));
    CHECK(p.isApprox(p.transpose()));
    if (k > 1) {
      const Matrix q = fam.matrix(k - 1, 8);
      CHECK((p * q).isApprox(q));  // nested ranges
    }
  }

  const double c = 4.0;
  const SpectralSystem heat = point_control_heat(0.3, c, 10);
  const ProjectionFamily hf = spectral_projection_family(heat, first_modes_rule(), 5);
  for (int k = 1; k <= 5; ++k) CHECK(hf.alpha_k[k - 1] == doctest::Approx((k + 1) * (k + 1) * pi * pi - c));

  // Threshold rule 2j + 1 - c <= k keeps j = 0..floor((k + c - 1)/2).
  const double ch = 2.0;
  const SpectralSystem herm = hermite_heat(ch, {{0.0, 50.0}}, 12);
  const ProjectionFamily hermf = spectral_projection_family(
      herm, eigenvalue_threshold_rule(herm, [](int k) { return static_cast<double>(k); }), 8);
  for (int k = 1; k <= 8; ++k) {
    const auto kept = static_cast<int>(hermf.range(k).size());
    CHECK(kept == static_cast<int>(std::floor((k + ch - 1.0) / 2.0)) + 1);
  }
  CHECK_NOTHROW(validate(hermf));

  SpectralSystem flat;
  flat.eigenvalues = -Vector::LinSpaced(3, 1.0, 3.0);
  flat.control_rows = Matrix::Ones(3, 1);
  CHECK_THROWS(spectral_projection_family(flat, [](int) { return Eigen::Index{0}; }, 3));
}

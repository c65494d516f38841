#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "stabcert/error.hpp"
#include "stabcert/feedback.hpp"
#include "stabcert/semigroup.hpp"

using namespace stabcert;

namespace {
LtiSystem scalar(double a, double b) {
  return build_system(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b));
}

// y(T) = e^{AT} y0 + int_0^T e^{A(T-t)} B u(t) dt, by Simpson per segment.
Vector simulate(const LtiSystem& s, const ControlSignal& u, const Vector& y0, double horizon) {
  Vector y = oracle::taylor_expm(s.a(), horizon) * y0;
  const auto bps = u.breakpoints();
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    for (Eigen::Index r = 0; r < y.size(); ++r) {
      y(r) += oracle::simpson(
          [&](double t) {
            const double tt = std::min(std::max(t, bps[i] + 1e-15), bps[i + 1] - 1e-15);
            return (oracle::taylor_expm(s.a(), horizon - t) * s.b() * u.evaluate(tt))(r);
          },
          bps[i], bps[i + 1], 400);
    }
  }
  return y;
}
}  // namespace

TEST_CASE("shifted Riccati scalar cases") {
  const FeedbackResult r = solve_shifted_riccati(scalar(0.0, 1.0), 1.0);
  CHECK(r.riccati_p(0, 0) == doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.gain_k(0, 0) == doctest::Approx(-(1 + std::sqrt(2.0))).epsilon(1e-12));
  CHECK(r.shifted_rate == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(r.measured_rate == doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-10));
  CHECK(r.residual < 1e-12);

  const FeedbackResult l = solve_shifted_riccati(scalar(-3.0, 0.0), 1.0);
  CHECK(l.riccati_p(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(l.gain_k(0, 0) == 0.0);
  CHECK(l.measured_rate == doctest::Approx(3.0));

  CHECK_THROWS_AS(solve_shifted_riccati(scalar(0.0, 0.0), 1.0), UnstabilizableError);
}

TEST_CASE("shifted Riccati on random pairs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const LtiSystem s = build_system(oracle::random_matrix(rng, 4, 4), oracle::random_matrix(rng, 4, 2));
    const double mu = 1.0 + trial * 0.5;
    const FeedbackResult r = solve_shifted_riccati(s, mu);
    const Matrix am = s.a() + mu * Matrix::Identity(4, 4);
    const Matrix p = r.riccati_p;
    const Matrix res = am.transpose() * p + p * am - p * s.b() * s.b().transpose() * p + Matrix::Identity(4, 4);
    CHECK(res.norm() <= 1e-9 * std::max(1.0, p.norm()));
    CHECK((p - p.transpose()).norm() <= 1e-12 * p.norm());
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(p).eigenvalues().minCoeff() > 0.0);
    CHECK(r.measured_rate >= mu);
    const Eigen::VectorXcd ev = (s.a() + s.b() * r.gain_k).eigenvalues();
    CHECK(-ev.real().maxCoeff() == doctest::Approx(r.measured_rate).epsilon(1e-9));
  }
}

TEST_CASE("closed-loop rate measurement") {
  Matrix d(2, 2);
  d << -1, 0, 0, -2;
  const RateMeasurement m = closed_loop_rate(build_system(d, Matrix::Ones(2, 1)), Matrix::Zero(1, 2), 5.0);
  CHECK(m.rate == doctest::Approx(1.0));
  CHECK(m.overshoot == doctest::Approx(1.0).epsilon(1e-12));

  const FeedbackResult r = solve_shifted_riccati(scalar(0.0, 1.0), 1.0);
  CHECK(closed_loop_rate(scalar(0.0, 1.0), r.gain_k, 5.0).rate ==
        doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-10));

  Matrix j(2, 2);
  j << -1, 1, 0, -1;
  const RateMeasurement jm = closed_loop_rate(build_system(j, Matrix::Ones(2, 1)), Matrix::Zero(1, 2), 10.0, 1000);
  CHECK(jm.rate == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(jm.overshoot > 1.0);

  const auto curve = decay_curve(build_system(d, Matrix::Ones(2, 1)), Matrix::Zero(1, 2), 2.0, 4);
  REQUIRE(curve.size() == 5);
  CHECK(curve.front().second == doctest::Approx(1.0));
  CHECK(curve.back().second == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("minimum-norm eps-null control") {
  const LtiSystem s = scalar(0.0, 1.0);
  const EpsNullControl exact = min_norm_eps_null(s, 1.0, 0.0, Vector::Ones(1));
  CHECK(exact.control.evaluate(0.3)(0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(exact.control.l2_norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(exact.terminal_state(0)) < 1e-12);

  const EpsNullControl none = min_norm_eps_null(scalar(-1.0, 1.0), 1.0, 0.5, Vector::Ones(1));
  CHECK(none.control.l2_norm() == 0.0);

  Matrix a(2, 2);
  a << -1, 0, 0, -2;
  const LtiSystem two = build_system(a, Matrix::Ones(2, 1));
  Vector y0(2);
  y0 << 1.0, -0.5;
  const EpsNullControl e2 = min_norm_eps_null(two, 1.0, 0.0, y0);
  CHECK(e2.terminal_state.norm() < 1e-9);
  CHECK(simulate(two, e2.control, y0, 1.0).norm() < 1e-8);
  // Minimum norm equals sqrt(z^T G^{-1} z) with z = e^{AT} y0.
  const Matrix g = observability_gramian(two, 1.0).matrix;
  const Vector z = oracle::taylor_expm(a, 1.0) * y0;
  CHECK(e2.control.l2_norm() == doctest::Approx(std::sqrt(z.dot(g.ldlt().solve(z)))).epsilon(1e-8));

  // Larger eps never costs more; the terminal ball is respected.
  double prev = e2.control.l2_norm();
  for (double eps : {1e-3, 1e-2, 0.05, 0.1}) {
    const EpsNullControl e = min_norm_eps_null(two, 1.0, eps, y0);
    CHECK(e.control.l2_norm() <= prev * (1 + 1e-9));
    CHECK(e.terminal_state.norm() <= eps * y0.norm() * (1 + 1e-6));
    CHECK(simulate(two, e.control, y0, 1.0).norm() <= eps * y0.norm() * (1 + 1e-5));
    prev = e.control.l2_norm();
  }

  const LtiSystem blocked = build_system(a, Matrix::Zero(2, 1));
  CHECK_THROWS_AS(min_norm_eps_null(build_system(Matrix::Zero(1, 1), Matrix::Zero(1, 1)), 1.0, 0.0, Vector::Ones(1)),
                  SteeringError);
  CHECK(min_norm_eps_null(blocked, 1.0, 0.5, y0).control.l2_norm() == 0.0);
}

TEST_CASE("concatenated controls decay geometrically") {
  const LtiSystem s = scalar(0.0, 1.0);
  const double eps = std::exp(-2.0);
  const ConcatenatedControl c = concatenated_control(s, 1.0, 1.0, eps, Vector::Ones(1), 6);
  CHECK(c.report.contraction_holds);
  REQUIRE(c.report.segment_ratios.size() == 5);
  for (double r : c.report.segment_ratios) CHECK(r == doctest::Approx(eps).epsilon(1e-6));
  CHECK(c.report.weighted_norm <= c.report.weighted_norm_bound * (1 + 1e-9));
  // Geometric sum: sum_i e^{i+1} |u_0| e^{-2i} = e |u_0| / (1 - e^{-1}).
  const double u0 = c.report.segment_norms.front();
  CHECK(c.report.weighted_norm_bound <= std::exp(1.0) * u0 / (1 - std::exp(-1.0)) * (1 + 1e-6));
  for (std::size_t i = 0; i < c.report.state_norms.size(); ++i)
    CHECK(c.report.state_norms[i] <= c.report.state_bounds[i] * (1 + 1e-9));
  CHECK(c.control.breakpoints().size() == 7);

  const ConcatenatedControl free = concatenated_control(scalar(-5.0, 1.0), 1.0, 1.0, eps, Vector::Ones(1), 3);
  CHECK(free.control.l2_norm() == 0.0);
  CHECK(free.report.state_norms[1] == doctest::Approx(std::exp(-5.0)));

  CHECK_THROWS_AS(concatenated_control(s, 1.0, 1.0, 0.2, Vector::Ones(1), 3), DomainError);
}

TEST_CASE("certificates compose with feedback") {
  const LtiSystem s = scalar(0.0, 1.0);
  const CertificateFamily fam = sweep_alpha(s, {1, 2, 3}, {0.5, 1, 2});
  REQUIRE(fam.verdict == CertStatus::certified);

  const FeedbackResult f15 = certificate_to_feedback(s, fam, 1.5);
  REQUIRE(f15.provenance.has_value());
  CHECK(f15.provenance->k == 2);
  CHECK(f15.measured_rate >= 1.5);
  CHECK(f15.provenance->shifted_residual < 1.0);

  const FeedbackResult f05 = certificate_to_feedback(s, fam, 0.5);
  CHECK(f05.provenance->k == 1);

  CHECK_THROWS(certificate_to_feedback(s, CertificateFamily{}, 1.0));

  const FeedbackResult fb = solve_shifted_riccati(s, 1.0);
  const WeakObsCertificate implied = certificate_from_feedback(s, fb, 1.0, 1.0);
  CHECK(implied.d_const > 0.0);
  CHECK(check_certificate(s, implied).status != CertStatus::refuted);
  WeakObsCertificate scaled = implied;
  scaled.d_const *= std::numbers::sqrt2;
  scaled.c_const *= std::numbers::sqrt2;
  CHECK(check_certificate(s, scaled).status == CertStatus::certified);
}

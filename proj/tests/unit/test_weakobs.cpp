#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "stabcert/error.hpp"
#include "stabcert/semigroup.hpp"
#include "stabcert/weakobs.hpp"

using namespace stabcert;

namespace {
LtiSystem scalar(double a, double b) {
  return build_system(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b));
}

WeakObsCertificate claim(double t, double alpha, double d, double c) {
  WeakObsCertificate w;
  w.horizon = t;
  w.alpha = alpha;
  w.d_const = d;
  w.c_const = c;
  return w;
}
}  // namespace

TEST_CASE("trivial certified and refuted claims") {
  const LtiSystem stable = build_system(-2.0 * Matrix::Identity(2, 2), Matrix::Zero(2, 1));
  // |e^{-2}| <= 0 + e^{-1}
  CHECK(check_certificate(stable, claim(1.0, 1.0, 0.0, 1.0)).status == CertStatus::certified);

  const WeakObsCertificate r = check_certificate(scalar(0.0, 0.0), claim(1.0, 1.0, 5.0, 1.0));
  CHECK(r.status == CertStatus::refuted);
  REQUIRE(r.witness.has_value());
  CHECK(violation(scalar(0.0, 0.0), claim(1.0, 1.0, 5.0, 1.0), *r.witness) > 0.0);
}

TEST_CASE("scalar unstable claim around the sufficient threshold") {
  const LtiSystem s = scalar(1.0, 1.0);
  // Exact optimum (e - e^{-2}) / sqrt((e^2 - 1)/2) ~ 1.445; the squared
  // sufficient test needs sqrt((e^2 - e^{-4}) / ((e^2 - 1)/2)) ~ 1.519.
  const double g = (std::exp(2.0) - 1.0) / 2.0;
  const double exact = (std::exp(1.0) - std::exp(-2.0)) / std::sqrt(g);
  const double suff = std::sqrt((std::exp(2.0) - std::exp(-4.0)) / g);
  CHECK(exact == doctest::Approx(1.4452).epsilon(1e-4));
  CHECK(suff == doctest::Approx(1.5190).epsilon(1e-4));

  CHECK(check_certificate(s, claim(1.0, 2.0, 1.0, 1.0)).status == CertStatus::refuted);
  CHECK(check_certificate(s, claim(1.0, 2.0, 1.5, 1.0)).status == CertStatus::inconclusive);
  const WeakObsCertificate ok = check_certificate(s, claim(1.0, 2.0, 1.6, 1.0));
  CHECK(ok.status == CertStatus::certified);
  CHECK(ok.sufficient_margin >= 0.0);

  Matrix m(1, 1), gm(1, 1);
  m << std::exp(2.0);
  gm << g;
  CHECK(sufficient_d(m, gm, std::exp(-2.0)) == doctest::Approx(suff).epsilon(1e-8));
  CHECK(std::isinf(sufficient_d(m, Matrix::Zero(1, 1), 0.1)));
}

TEST_CASE("decide_inequality refutes exactly when a ratio exceeds D") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix phi = oracle::random_matrix(rng, 3, 3);
    const Matrix h = oracle::random_matrix(rng, 3, 3);
    const Matrix m = phi * phi.transpose();
    const Matrix g = h * h.transpose() + 0.1 * Matrix::Identity(3, 3);
    const double eps = 0.05;
    const double d_star = sufficient_d(m, g, eps);
    CheckOptions opts;
    CHECK(decide_inequality(m, g, d_star, eps, opts).status == CertStatus::certified);
    const InequalityDecision low = decide_inequality(m, g, 0.3 * d_star, eps, opts);
    if (low.status == CertStatus::refuted) {
      REQUIRE(low.witness.has_value());
      CHECK(weak_ratio(m, g, eps, *low.witness) > 0.3 * d_star);
    }
    // The sampled best ratio never beats the sufficient constant.
    CHECK(sample_best_ratio(m, g, eps, opts).first <= d_star * (1 + 1e-9));
  }
}

TEST_CASE("optimal D bracket") {
  const DBracket b01 = optimal_d_bracket(scalar(0.0, 1.0), 1.0, 0.0);
  CHECK(b01.d_lo == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(b01.d_hi == doctest::Approx(1.0).epsilon(1e-6));

  const DBracket b11 = optimal_d_bracket(scalar(1.0, 1.0), 1.0, 0.0);
  const double opt = std::exp(1.0) / std::sqrt((std::exp(2.0) - 1) / 2);
  CHECK(opt == doctest::Approx(1.522).epsilon(1e-3));
  CHECK(b11.d_lo == doctest::Approx(opt).epsilon(1e-6));
  CHECK(b11.d_hi <= std::sqrt(2.0) * opt);

  // D scales like 1/s when B is scaled by s.
  const DBracket scaled = optimal_d_bracket(scalar(1.0, 4.0), 1.0, 0.0);
  CHECK(scaled.d_lo == doctest::Approx(opt / 4).epsilon(1e-6));

  std::mt19937_64 rng(11);
  const LtiSystem r = build_system(oracle::random_matrix(rng, 3, 3, 0.5), oracle::random_matrix(rng, 3, 2));
  const DBracket br = optimal_d_bracket(r, 1.0, 0.1);
  CHECK(br.d_lo <= br.d_hi * (1 + 1e-9));
}

TEST_CASE("alpha sweep") {
  const CertificateFamily c01 = sweep_alpha(scalar(0.0, 1.0), {1, 2, 4}, {0.5, 1, 2});
  CHECK(c01.verdict == CertStatus::certified);
  for (const auto& v : c01.per_alpha) {
    CHECK(v.status == CertStatus::certified);
    CHECK(std::isfinite(v.d_const));
  }
  CHECK(c01.certificates.size() == 9);
  CHECK(c01.at(1, 2).alpha == 2.0);
  CHECK(c01.at(1, 2).horizon == 2.0);

  Matrix a(2, 2);
  a << 1, 0, 0, -10;
  Matrix b(2, 1);
  b << 1, 0;
  CHECK(sweep_alpha(build_system(a, b), {1, 2, 4}, {0.5, 1, 2}).verdict == CertStatus::certified);

  Matrix bu(2, 1);
  bu << 0, 1;
  const CertificateFamily blocked = sweep_alpha(build_system(a, bu), {1, 2}, {1, 2});
  CHECK(blocked.verdict != CertStatus::certified);

  SweepOptions iii;
  iii.statement = Statement::iii_grid;
  iii.t0 = 0.75;
  const CertificateFamily f3 = sweep_alpha(scalar(0.0, 1.0), {1, 2}, {0.5, 1, 2}, unit_residual_rule(), iii);
  CHECK(f3.horizons.size() == 2);
  for (double t : f3.horizons) CHECK(t > 0.75);

  // Thread count does not change results.
  SweepOptions par;
  par.threads = 4;
  const CertificateFamily c4 = sweep_alpha(scalar(0.0, 1.0), {1, 2, 4}, {0.5, 1, 2}, unit_residual_rule(), par);
  for (std::size_t i = 0; i < c01.certificates.size(); ++i)
    CHECK(c4.certificates[i].d_const == c01.certificates[i].d_const);
}

TEST_CASE("discrete sequence") {
  const double e3 = std::exp(3.0);
  const ResidualRule rule = table_residual_rule({{2.0, e3}, {3.0, 1.0}});
  const CertificateFamily fam = sweep_alpha(scalar(0.0, 1.0), {2, 3}, {1, 2, 3, 3.5, 4}, rule);
  const auto seq = discrete_sequence(fam, 2);
  REQUIRE(seq.size() == 2);
  CHECK(seq[0].k == 1);
  CHECK(seq[0].t_k == 3.5);  // needs C(2) < e^{T}
  CHECK(seq[1].k == 2);
  CHECK(seq[1].t_k == 1.0);
  CHECK(seq[0].d_k == fam.at(0, 3).d_const);

  CertificateFamily empty;
  CHECK_THROWS(discrete_sequence(empty, 1));
}

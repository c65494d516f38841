#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "stabcert/error.hpp"
#include "stabcert/periodic.hpp"

using namespace stabcert;

namespace {
PeriodicSystem generic(const Vector& a, std::vector<Interval> windows) {
  PeriodicSystem p;
  p.period = 1.0;
  p.a_diag = a;
  p.windows = std::move(windows);
  return p;
}
}  // namespace

TEST_CASE("switching example construction") {
  const PeriodicSystem p = build_example4(10);
  REQUIRE(p.alpha_series.has_value());
  double alpha = 0.0;
  for (int k = 1; k <= 40; ++k) alpha += std::exp(-double(k) * k);
  CHECK(*p.alpha_series == doctest::Approx(alpha).epsilon(1e-15));
  CHECK(*p.alpha_series == doctest::Approx(0.3863186).epsilon(1e-7));
  CHECK(p.series_tail_bound < 1e-50);
  CHECK(p.switch_times[0] == 1.0);
  CHECK(p.switch_times[1] == doctest::Approx(0.047732).epsilon(1e-5));
  for (std::size_t i = 1; i < p.switch_times.size(); ++i) CHECK(p.switch_times[i] < p.switch_times[i - 1]);
  for (int n = 1; n <= 10; ++n) {
    CHECK(p.a_diag(n - 1) == -n);
    CHECK(p.windows[n - 1].lo == p.switch_times[n]);
    CHECK(p.windows[n - 1].hi == p.switch_times[n - 1]);
  }
  CHECK_THROWS_AS(build_example4(10, 11), DomainError);
  CHECK_THROWS_AS(build_example4(0), DomainError);
}

TEST_CASE("evolution operators") {
  const PeriodicSystem p = build_example4(4);
  const Matrix phi = periodic_evolution(p, 2.5, 0.5);
  for (int n = 1; n <= 4; ++n) CHECK(phi(n - 1, n - 1) == doctest::Approx(std::exp(-2.0 * n)));
  CHECK(periodic_evolution(p, 1.7, 1.7).isApprox(Matrix::Identity(4, 4)));

  std::mt19937_64 rng(9);
  PiecewiseGenerator gen;
  gen.period = 1.0;
  gen.breakpoints = {0.0, 0.3, 0.75, 1.0};
  for (int i = 0; i < 3; ++i) gen.generators.push_back(oracle::random_matrix(rng, 3, 3));
  const Matrix a = periodic_evolution(gen, 2.4, 0.2);
  CHECK(a.isApprox(periodic_evolution(gen, 2.4, 1.1) * periodic_evolution(gen, 1.1, 0.2), 1e-10));
  CHECK(periodic_evolution(gen, 3.4, 1.2).isApprox(a, 1e-10));
  // Explicit product over the pieces met on [0.2, 1.0].
  const Matrix manual = oracle::taylor_expm(gen.generators[2], 0.25) *
                        oracle::taylor_expm(gen.generators[1], 0.45) *
                        oracle::taylor_expm(gen.generators[0], 0.1);
  CHECK(periodic_evolution(gen, 1.0, 0.2).isApprox(manual, 1e-10));

  PiecewiseGenerator bad = gen;
  bad.breakpoints = {0.0, 0.5, 0.4, 1.0};
  CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("observation energies: closed form vs quadrature") {
  const PeriodicSystem p = build_example4(6);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector psi = oracle::random_vector(rng, 6);
    const int m = 1 + trial % 3;
    const double closed = periodic_observation_energy(p, m, psi);
    const double quad = periodic_observation_energy_quadrature(p, m, psi);
    CHECK(closed == doctest::Approx(quad).epsilon(1e-9));
  }
  CHECK(periodic_observation_energy(p, 1, Vector::Zero(6)) == 0.0);

  const double alpha = *p.alpha_series;
  const Vector g = periodic_mode_energies(p, 1);
  for (int n = 1; n <= 6; ++n) {
    const double lo = p.switch_times[n], hi = p.switch_times[n - 1];
    const double direct = oracle::simpson([&](double s) { return std::exp(-2.0 * n * (1.0 - s)); }, lo, hi, 2000);
    CHECK(g(n - 1) == doctest::Approx(direct).epsilon(1e-10));
    CHECK(g(n - 1) <= 2.0 / alpha * std::exp(-double(n) * n));
    CHECK(g(n - 1) >= std::exp(-double(n) * n) / alpha * std::exp(-2.0 * n));
  }
}

TEST_CASE("null-controllability witnesses") {
  const PeriodicSystem p = build_example4(10);
  const NullControllabilityWitness w = noncontrollability_witness(p, 1, 10.0);
  CHECK(w.n == 4);
  CHECK(w.lhs == doctest::Approx(std::exp(-4.0)));
  CHECK(w.lhs > w.rhs);
  CHECK(w.energy <= 2.0 / *p.alpha_series * std::exp(-16.0));

  CHECK(noncontrollability_witness(p, 1, 1.0 + 1e-9).n == 3);

  int prev_m = 0;
  for (int m : {1, 2, 3}) {
    int prev_c = 0;
    for (double c : {2.0, 10.0, 100.0}) {
      const NullControllabilityWitness x = noncontrollability_witness(p, m, c);
      CHECK(x.lhs > x.rhs);
      CHECK(x.energy <= x.energy_bound);
      CHECK(x.n >= prev_c);
      prev_c = x.n;
      if (c == 2.0) {
        CHECK(x.n >= prev_m);
        prev_m = x.n;
      }
    }
  }
  const NullControllabilityWitness grown = noncontrollability_witness(build_example4(3), 3, 100.0);
  CHECK(grown.extended);
  CHECK_THROWS(noncontrollability_witness(build_example4(3), 3, 100.0, false));
}

TEST_CASE("periodic weak observability") {
  const PeriodicSystem full = generic(Vector::Constant(2, -1.0), {{0.0, 1.0}, {0.0, 1.0}});
  CHECK(periodic_weakobs_check(full, 1, 1, 1.0).status == CertStatus::certified);

  const PeriodicSystem blind = generic(Vector::Zero(2), {{0.5, 0.5}, {0.5, 0.5}});
  const PeriodicCertificate r = periodic_weakobs_check(blind, 1, 1, 100.0);
  CHECK(r.status == CertStatus::refuted);
  CHECK(r.witness.has_value());

  const PeriodicSystem p = build_example4(8);
  CHECK(example4_constant(p, 1) == doctest::Approx(std::sqrt(*p.alpha_series) * std::exp(0.5)));
  CHECK(example4_constant(p, 1) == doctest::Approx(1.0249).epsilon(1e-4));
  const PeriodicCertificate e1 = example4_stabilizability_check(p, 1);
  CHECK(e1.status == CertStatus::certified);
  for (const ModeMargin& mm : e1.mode_margins) {
    CHECK(mm.key_fact_holds);
    CHECK(mm.energy >= mm.energy_lower_bound * (1 - 1e-12));
  }
  const PeriodicCertificate direct = periodic_weakobs_check(p, 1, 1, example4_constant(p, 1));
  CHECK(direct.status == e1.status);
  CHECK(direct.sufficient_margin == doctest::Approx(e1.sufficient_margin));

  CHECK_THROWS_AS(validate(generic(Vector::Zero(1), {{0.2, 1.5}})), DomainError);
}

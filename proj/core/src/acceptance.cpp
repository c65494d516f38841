#include "stabcert/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "stabcert/error.hpp"
#include "stabcert/feedback.hpp"
#include "stabcert/lrconstants.hpp"
#include "stabcert/periodic.hpp"
#include "stabcert/projection.hpp"
#include "stabcert/semigroup.hpp"
#include "stabcert/systems.hpp"
#include "stabcert/weakobs.hpp"

namespace stabcert {

void AcceptanceTolerances::set(const std::string& key, double value) {
  if (!(value > 0.0)) throw DomainError("tolerance " + key + " must be positive");
  if (key == "riccati") riccati = value;
  else if (key == "gramian") gramian = value;
  else if (key == "rate") rate = value;
  else if (key == "closed_form") closed_form = value;
  else if (key == "contraction") contraction = value;
  else if (key == "segment_ratio") segment_ratio = value;
  else if (key == "adversarial") adversarial = value;
  else throw DomainError("unknown tolerance key: " + key);
}

std::map<std::string, double> AcceptanceTolerances::as_map() const {
  return {{"riccati", riccati},         {"gramian", gramian},         {"rate", rate},
          {"closed_form", closed_form}, {"contraction", contraction}, {"segment_ratio", segment_ratio},
          {"adversarial", adversarial}};
}

namespace {

struct Outcome {
  bool passed = true;
  int failures = 0;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (passed) detail.str("");
    passed = false;
    ++failures;
    if (failures <= 5) detail << (failures > 1 ? "; " : "") << why;
    if (failures == 6) detail << "; ...";
  }
};

CriterionResult run_criterion(int id, const char* name, double budget, const AcceptanceOptions& opts,
                              const std::function<void(Outcome&)>& body) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  r.budget_seconds = budget;
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.passed = out.passed;
  r.detail = out.detail.str();
  if (opts.enforce_runtime && r.seconds > budget) {
    r.passed = false;
    r.detail += (r.detail.empty() ? "" : "; ") + std::string("over runtime budget");
  }
  return r;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool close_rel(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

double controllability_ratio(const Matrix& a, const Matrix& b) {
  const Eigen::Index n = a.rows();
  Matrix k(n, n * b.cols());
  Matrix blk = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    k.middleCols(i * b.cols(), b.cols()) = blk;
    blk = a * blk;
  }
  Eigen::JacobiSVD<Matrix> svd(k);
  const Vector s = svd.singularValues();
  return s(n - 1) / s(0);
}

// Gramian by the block-exponential route, independent of quadrature.
Matrix gramian_van_loan(const LtiSystem& sys, double horizon) {
  const Eigen::Index n = sys.states();
  Matrix c = Matrix::Zero(2 * n, 2 * n);
  c.topLeftCorner(n, n) = -sys.a();
  c.topRightCorner(n, n) = sys.b() * sys.b().transpose();
  c.bottomRightCorner(n, n) = sys.a().transpose();
  const Matrix e = expm(c, horizon);
  const Matrix g = e.bottomRightCorner(n, n).transpose() * e.topRightCorner(n, n);
  return 0.5 * (g + g.transpose());
}

}  // namespace

CriterionResult acceptance_riccati(const AcceptanceOptions& opts) {
  return run_criterion(1, "scalar Riccati oracle", 1.0, opts, [&](Outcome& out) {
    const double tol = opts.tol.riccati;
    const FeedbackResult base = solve_shifted_riccati(build_system(Matrix::Zero(1, 1), Matrix::Ones(1, 1)), 1.0);
    if (!close_rel(base.shifted_rate, std::numbers::sqrt2, tol)) {
      out.fail("(0,1,1) shifted rate " + num(base.shifted_rate));
    }
    if (!close_rel(base.riccati_p(0, 0), 1.0 + std::numbers::sqrt2, tol)) {
      out.fail("(0,1,1) p " + num(base.riccati_p(0, 0)));
    }
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> ua(-2.0, 2.0), ub(0.2, 2.0), um(0.1, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double a = ua(rng), b = ub(rng), mu = um(rng);
      const FeedbackResult fb = solve_shifted_riccati(build_system(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b)), mu);
      const double s = a + mu;
      const double p = (s + std::sqrt(s * s + b * b)) / (b * b);
      const double want = -(a - b * b * p);
      const double err = std::abs(fb.measured_rate - want) / std::max(1.0, std::abs(want));
      worst = std::max(worst, err);
      if (err > tol) out.fail("triple " + std::to_string(i) + " rate " + num(fb.measured_rate) + " vs " + num(want));
    }
    if (out.passed) out.detail << "sqrt2 reproduced; worst relative rate error " << num(worst) << " over 50 triples";
  });
}

CriterionResult acceptance_gramian(const AcceptanceOptions& opts) {
  return run_criterion(2, "Gramian closed form vs quadrature", 5.0, opts, [&](Outcome& out) {
    std::mt19937_64 rng(opts.seed + 2);
    std::uniform_int_distribution<int> un(1, 20), um(1, 3);
    std::uniform_real_distribution<double> ul(-5.0, 1.0), ut(0.5, 2.0);
    const QuadratureSpec quad;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const int n = un(rng), m = um(rng);
      Matrix a = Matrix::Zero(n, n);
      for (int j = 0; j < n; ++j) a(j, j) = ul(rng);
      const LtiSystem sys = build_system(a, random_matrix(rng, n, m, 1.0));
      const double t = ut(rng);
      const Matrix g1 = observability_gramian(sys, t, quad, GramianMethod::closed_form).matrix;
      const Matrix g2 = observability_gramian(sys, t, quad, GramianMethod::quadrature).matrix;
      const double err = (g1 - g2).norm() / g1.norm();
      worst = std::max(worst, err);
      if (err > opts.tol.gramian) out.fail("system " + std::to_string(i) + " relative error " + num(err));
    }
    if (out.passed) out.detail << "worst relative error " << num(worst) << " over 100 systems";
  });
}

CriterionResult acceptance_equivalence(const AcceptanceOptions& opts) {
  return run_criterion(3, "stabilizability / weak observability equivalence", 30.0, opts, [&](Outcome& out) {
    std::mt19937_64 rng(opts.seed + 3);
    std::uniform_int_distribution<int> un(1, 6), um(1, 2);
    const std::vector<double> alphas{1, 2, 3, 4, 6, 8};
    const std::vector<double> horizons{0.5, 1.0, 2.0};
    SweepOptions so;
    so.threads = opts.threads;
    int ok_pairs = 0;
    double worst_rate_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 30; ++i) {
      LtiSystem sys = build_system(Matrix::Zero(1, 1), Matrix::Ones(1, 1));
      for (;;) {
        const int n = un(rng), m = um(rng);
        Matrix a = random_matrix(rng, n, n, 1.0 / std::sqrt(static_cast<double>(n)));
        Matrix b = random_matrix(rng, n, m, 1.0);
        if (controllability_ratio(a, b) < 1e-3) continue;
        // Keep pairs whose shortest-horizon Gramian is resolved above quadrature noise.
        LtiSystem cand = build_system(a, b);
        Eigen::SelfAdjointEigenSolver<Matrix> es(observability_gramian(cand, horizons.front()).matrix,
                                                 Eigen::EigenvaluesOnly);
        if (es.eigenvalues()(0) > 1e-8 * es.eigenvalues()(n - 1)) {
          sys = std::move(cand);
          break;
        }
      }
      so.check.seed = opts.seed + 31 * i;
      const CertificateFamily fam = sweep_alpha(sys, alphas, horizons, unit_residual_rule(), so);
      bool ok = true;
      for (const AlphaVerdict& v : fam.per_alpha) {
        const bool needed = v.alpha == 1 || v.alpha == 2 || v.alpha == 4 || v.alpha == 8;
        if (needed && v.status != CertStatus::certified) {
          out.fail("pair " + std::to_string(i) + " alpha " + num(v.alpha) + " " + to_string(v.status));
          ok = false;
        }
      }
      for (double mu : {1.0, 2.0, 4.0}) {
        const FeedbackResult fb = certificate_to_feedback(sys, fam, mu);
        worst_rate_gap = std::min(worst_rate_gap, fb.measured_rate - mu);
        if (fb.measured_rate < mu - opts.tol.rate) {
          out.fail("pair " + std::to_string(i) + " mu " + num(mu) + " rate " + num(fb.measured_rate));
          ok = false;
        }
      }
      ok_pairs += ok;
    }

    int blocked = 0;
    for (int i = 0; i < 10; ++i) {
      const int n = std::max(2, un(rng));
      const int m = um(rng);
      Matrix a0 = Matrix::Zero(n, n);
      a0(0, 0) = 1.0;
      a0.bottomRightCorner(n - 1, n - 1) = random_matrix(rng, n - 1, n - 1, 1.0 / std::sqrt(n - 1.0));
      Matrix b0 = Matrix::Zero(n, m);
      b0.bottomRows(n - 1) = random_matrix(rng, n - 1, m, 1.0);
      const Matrix q = Eigen::HouseholderQR<Matrix>(random_matrix(rng, n, n, 1.0)).householderQ();
      const LtiSystem sys = build_system(q * a0 * q.transpose(), q * b0);
      so.check.seed = opts.seed + 7919 * i;
      const CertificateFamily fam = sweep_alpha(sys, {2.0}, horizons, unit_residual_rule(), so);
      bool sweep_failed = fam.per_alpha.front().status != CertStatus::certified;
      bool synth_failed = false;
      try {
        solve_shifted_riccati(sys, 2.0);
      } catch (const UnstabilizableError&) {
        synth_failed = true;
      }
      if (!sweep_failed) out.fail("blocked pair " + std::to_string(i) + " certified at alpha 2");
      if (!synth_failed) out.fail("blocked pair " + std::to_string(i) + " synthesized mu 2");
      blocked += sweep_failed && synth_failed;
    }
    if (out.passed) {
      out.detail << ok_pairs << "/30 controllable pairs certified and stabilized (min rate - mu "
                 << num(worst_rate_gap) << "); " << blocked << "/10 blocked pairs rejected by both";
    }
  });
}

CriterionResult acceptance_lr_constants(const AcceptanceOptions& opts) {
  return run_criterion(4, "spectral + dissipative constants certify", 10.0, opts, [&](Outcome& out) {
    const double x0 = 1.0 / std::numbers::sqrt2;
    const double c = 5.0;
    const SpectralSystem spec = point_control_heat(x0, c, 16);
    const LtiSystem sys = spec.to_lti();
    const ProjectionFamily fam = spectral_projection_family(spec, first_modes_rule(), 15);
    const SemigroupBound bound = fit_semigroup_bound(sys);
    Eigen::JacobiSVD<Matrix> svd(sys.b());
    const double b_norm = svd.singularValues()(0);
    const double t0 = 0.5;
    const std::vector<double> grid{0.5, 1.0, 1.25, 1.5, 2.0, 3.0, 4.0};
    CheckOptions co;
    co.seed = opts.seed + 4;
    int checked = 0;
    for (double alpha : {1.0, 2.0}) {
      int k = 1;
      while (!(fam.alpha_k[k - 1] > alpha)) ++k;
      const double ck = estimate_spectral_constant(spec, fam, k).value;
      const double ckt0 = pointwise_c_kt0(x0, c, k, t0);
      const CertificateConstants b1 = constants_b1(bound, fam.m_k[k - 1], fam.alpha_k[k - 1], ck, b_norm, alpha);
      const CertificateConstants b2 =
          constants_b2(bound, t0, ckt0, fam.m_k[k - 1], fam.alpha_k[k - 1], b_norm, alpha);
      for (const auto& [label, cc] : {std::pair{"b1", b1}, std::pair{"b2", b2}}) {
        for (double t : grid) {
          if (!cc.valid_for(t)) continue;
          WeakObsCertificate cert;
          cert.horizon = t;
          cert.alpha = alpha;
          cert.d_const = cc.d_const;
          cert.c_const = cc.c_const;
          const WeakObsCertificate r = check_certificate(sys, cert, co);
          ++checked;
          if (r.status != CertStatus::certified) {
            out.fail(std::string(label) + " alpha " + num(alpha) + " T " + num(t) + " " + to_string(r.status));
          }
        }
      }
    }
    if (out.passed) out.detail << checked << " certificates certified on the 16-mode truncation";
  });
}

CriterionResult acceptance_example4(const AcceptanceOptions& opts) {
  return run_criterion(5, "periodic switching example numbers", 5.0, opts, [&](Outcome& out) {
    const double tol = opts.tol.closed_form;
    const PeriodicSystem sys = build_example4(10, 12);
    const double alpha = *sys.alpha_series;
    double partial = 0.0;
    for (int k = 1; k <= 5; ++k) partial += std::exp(-static_cast<double>(k * k));
    if (std::abs(alpha - 0.3863186) > 5e-8) out.fail("alpha " + num(alpha));
    if (std::abs(alpha - partial) > tol) out.fail("alpha differs from 5-term partial sum");
    if (!(sys.series_tail_bound < 1e-16 * alpha)) out.fail("series tail bound not below precision");

    const NullControllabilityWitness w = noncontrollability_witness(sys, 1, 10.0);
    if (w.n != 4) out.fail("witness n " + std::to_string(w.n));
    if (!(w.lhs > w.rhs)) out.fail("witness lhs <= rhs");
    if (std::abs(w.lhs - std::exp(-4.0)) > tol) out.fail("witness lhs " + num(w.lhs));
    if (!(w.energy <= 2.0 / alpha * std::exp(-16.0))) out.fail("energy above (2/alpha) e^-16");
    Vector e4 = Vector::Zero(sys.modes());
    e4(3) = 1.0;
    const double quad = periodic_observation_energy_quadrature(sys, 1, e4);
    if (std::abs(quad - w.energy) > tol * w.energy) out.fail("closed-form energy vs quadrature");

    if (!close_rel(example4_constant(sys, 1), std::sqrt(alpha) * std::exp(0.5), tol)) {
      out.fail("C(1) " + num(example4_constant(sys, 1)));
    }
    for (int k = 1; k <= 5; ++k) {
      const PeriodicCertificate pc = example4_stabilizability_check(sys, k, 200, opts.seed + k);
      if (pc.status != CertStatus::certified) out.fail("k " + std::to_string(k) + " " + to_string(pc.status));
      for (const ModeMargin& mm : pc.mode_margins) {
        if (!mm.key_fact_holds) out.fail("key fact fails at k " + std::to_string(k) + " n " + std::to_string(mm.n));
        if (mm.energy < mm.energy_lower_bound * (1.0 - tol)) {
          out.fail("energy lower bound fails at n " + std::to_string(mm.n));
        }
      }
    }
    if (out.passed) {
      out.detail << "alpha " << num(alpha) << ", witness n 4 (lhs " << num(w.lhs) << " > rhs " << num(w.rhs)
                 << "), k=1..5 certified";
    }
  });
}

CriterionResult acceptance_continued_fraction(const AcceptanceOptions& opts) {
  return run_criterion(6, "continued fraction actuator point", 1.0, opts, [&](Outcome& out) {
    const ContinuedFractionX0 cf = continued_fraction_x0(3);
    if (!(cf.q.size() > 3 && cf.q[2] == 2u && cf.q[3] == 5963u)) out.fail("q_2, q_3 mismatch");
    if (!(cf.partial_quotients.size() > 2 && cf.partial_quotients[2] == 2981u)) out.fail("a_2 mismatch");
    // Consecutive convergents: |p_{n+1} q_n - p_n q_{n+1}| = 1 with alternating sign,
    // so x0 lies strictly between them and |x0 - p_n/q_n| < 1/(q_n q_{n+1}).
    int sign = 0;
    for (std::size_t i = 0; i + 1 < cf.convergents.size(); ++i) {
      const auto& c0 = cf.convergents[i];
      const auto& c1 = cf.convergents[i + 1];
      __extension__ using wide = __int128;
      const wide det = static_cast<wide>(c1.p) * c0.q - static_cast<wide>(c0.p) * c1.q;
      if (det != 1 && det != -1) out.fail("determinant identity fails at n " + std::to_string(i + 1));
      if (sign != 0 && det == sign) out.fail("convergents do not alternate");
      sign = static_cast<int>(det);
      const double gap = 1.0 / (static_cast<double>(c0.q) * static_cast<double>(c1.q));
      const double err = std::abs(cf.value - static_cast<double>(c0.p) / static_cast<double>(c0.q));
      if (err > gap * (1.0 + 1e-12)) out.fail("error bound fails at n " + std::to_string(i + 1));
    }
    if (cf.convergents.size() < 3 || cf.convergents[2].p != 2981u || cf.convergents[2].q != 5963u) {
      out.fail("convergent p_3/q_3 != 2981/5963");
    }
    bool refused = false;
    try {
      pointwise_c_kt0(0.5, 5.0, 3, 0.5);
    } catch (const VanishingModeError& e) {
      refused = e.mode() == 2;
      if (!refused) out.fail("vanishing mode reported as " + std::to_string(e.mode()));
    }
    if (!refused) out.fail("x0 = 1/2 accepted");
    if (out.passed) out.detail << "convergent 2981/5963; x0 = 1/2 refused at mode 2";
  });
}

CriterionResult acceptance_concatenation(const AcceptanceOptions& opts) {
  return run_criterion(7, "concatenated null controls", 2.0, opts, [&](Outcome& out) {
    const LtiSystem sys = build_system(Matrix::Zero(1, 1), Matrix::Ones(1, 1));
    const double eps = std::exp(-2.0);
    const ConcatenatedControl cc = concatenated_control(sys, 1.0, 1.0, eps, Vector::Ones(1), 6);
    const DecayReport& r = cc.report;
    for (std::size_t i = 0; i < r.state_norms.size(); ++i) {
      if (r.state_norms[i] > std::exp(-2.0 * i) * (1.0 + opts.tol.contraction)) {
        out.fail("|y(" + std::to_string(i) + ")| = " + num(r.state_norms[i]));
      }
    }
    if (r.segment_ratios.size() != 5) out.fail("expected 5 segment ratios");
    double worst = 0.0;
    for (double q : r.segment_ratios) {
      worst = std::max(worst, q);
      if (q > eps * (1.0 + opts.tol.segment_ratio)) out.fail("segment ratio " + num(q));
    }
    if (!(r.weighted_norm <= r.weighted_norm_bound * (1.0 + 1e-9))) out.fail("weighted norm above bound");
    if (out.passed) out.detail << "max segment ratio " << num(worst) << " (e^-2 = " << num(eps) << ")";
  });
}

CriterionResult acceptance_soundness(const AcceptanceOptions& opts) {
  return run_criterion(8, "weak observability decision soundness", 60.0, opts, [&](Outcome& out) {
    std::mt19937_64 rng(opts.seed + 8);
    std::uniform_int_distribution<int> un(1, 5), um(1, 2);
    std::uniform_real_distribution<double> ut(0.5, 2.0), ua(0.5, 3.0), uc(0.5, 2.0), uf(0.3, 1.5);
    std::normal_distribution<double> nd(0.0, 1.0);
    int certified = 0, refuted = 0, inconclusive = 0;
    for (int s = 0; s < 20; ++s) {
      const int n = un(rng), m = um(rng);
      const LtiSystem sys = build_system(random_matrix(rng, n, n, 0.8), random_matrix(rng, n, m, 1.0));
      for (int c = 0; c < 10; ++c) {
        WeakObsCertificate cert;
        cert.horizon = ut(rng);
        cert.alpha = ua(rng);
        cert.c_const = uc(rng);
        const double eps = cert.residual();
        const Matrix e = expm(sys.a(), cert.horizon);
        const Matrix term = e * e.transpose();
        const Matrix obs = gramian_van_loan(sys, cert.horizon);
        const double d_star = sufficient_d(term, obs, eps);
        cert.d_const = std::isfinite(d_star) ? d_star * uf(rng) : 1.0 + 9.0 * uf(rng);
        CheckOptions co;
        co.seed = opts.seed + 1000 * s + c;
        const WeakObsCertificate r = check_certificate(sys, cert, co);
        const std::string tag = "system " + std::to_string(s) + " cert " + std::to_string(c);
        if (r.status == CertStatus::certified) {
          ++certified;
          // Adversarial re-test: random directions plus perturbed pencil eigenvectors.
          const Matrix rhs = r.d_const * r.d_const * obs + eps * eps * Matrix::Identity(n, n);
          Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(term, rhs);
          const Matrix vecs = ges.eigenvectors();
          for (int i = 0; i < 10000; ++i) {
            Vector phi(n);
            for (int j = 0; j < n; ++j) phi(j) = nd(rng);
            if (i % 10 == 0) phi = vecs.col(n - 1 - (i / 10) % n) + 1e-3 * phi;
            const double lhs = std::sqrt(std::max(0.0, phi.dot(term * phi)));
            const double bound = r.d_const * std::sqrt(std::max(0.0, phi.dot(obs * phi))) + eps * phi.norm();
            if (lhs > bound * (1.0 + opts.tol.adversarial)) {
              out.fail(tag + " certified but violated by sample " + std::to_string(i));
              break;
            }
          }
        } else if (r.status == CertStatus::refuted) {
          ++refuted;
          if (!r.witness || !(violation(sys, r, *r.witness) > 0.0)) {
            out.fail(tag + " refuted without a reproducible witness");
          }
        } else {
          ++inconclusive;
        }
      }
    }
    if (certified == 0 || refuted == 0) out.fail("sample did not exercise both verdicts");
    if (out.passed) {
      out.detail << certified << " certified, " << refuted << " refuted, " << inconclusive
                 << " inconclusive; all verdicts reconfirmed";
    }
  });
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  return {acceptance_riccati(opts),         acceptance_gramian(opts),
          acceptance_equivalence(opts),     acceptance_lr_constants(opts),
          acceptance_example4(opts),        acceptance_continued_fraction(opts),
          acceptance_concatenation(opts),   acceptance_soundness(opts)};
}

std::string format_result(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "%s  %d  %-48s (%.2f s / %.0f s)  ", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.budget_seconds);
  return head + r.detail;
}

}  // namespace stabcert

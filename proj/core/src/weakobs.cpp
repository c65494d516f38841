#include "stabcert/weakobs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "parallel.hpp"
#include "stabcert/error.hpp"
#include "stabcert/semigroup.hpp"

namespace stabcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Violations smaller than this fraction of |S(T)* phi| are not trusted as refutations.
constexpr double kRefuteRelative = 1e-9;

double psd_tolerance(const Matrix& m, const Matrix& g, double d, double eps) {
  return 1e-12 * std::max({m.norm(), d * d * g.norm(), eps * eps, 1e-300});
}

double min_eig(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double quad_form(const Matrix& m, const Vector& v) { return v.dot(m * v); }

struct Sides {
  double lhs;
  double obs;
};

Sides sides(const Matrix& m, const Matrix& g, const Vector& phi) {
  return Sides{std::sqrt(std::max(0.0, quad_form(m, phi))), std::sqrt(std::max(0.0, quad_form(g, phi)))};
}

std::vector<Vector> pencil_directions(const Matrix& m, const Matrix& g) {
  const Eigen::Index n = m.rows();
  std::vector<Vector> dirs;
  Eigen::SelfAdjointEigenSolver<Matrix> em(m);
  Eigen::SelfAdjointEigenSolver<Matrix> eg(g);
  for (Eigen::Index i = 0; i < n; ++i) {
    dirs.emplace_back(em.eigenvectors().col(i));
    dirs.emplace_back(eg.eigenvectors().col(i));
  }
  // Whitened pencil (M, G + delta I): eigenvectors of W^T M W with W = V L^{-1/2}.
  const double delta = 1e-13 * std::max(g.trace(), 1e-300);
  const Vector lam = eg.eigenvalues().cwiseMax(delta);
  const Matrix w = eg.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> ep(w.transpose() * m * w);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector v = w * ep.eigenvectors().col(i);
    const double nv = v.norm();
    if (nv > 0.0 && std::isfinite(nv)) dirs.emplace_back(v / nv);
  }
  return dirs;
}

Vector ascend(const Matrix& m, const Matrix& g, double eps, Vector phi, const CheckOptions& opts) {
  double best = weak_ratio(m, g, eps, phi);
  double step = opts.ascent_step;
  const double h = 1e-6;
  for (int it = 0; it < opts.ascent_iterations && std::isfinite(best); ++it) {
    Vector grad(phi.size());
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      Vector p = phi;
      Vector q = phi;
      p(i) += h;
      q(i) -= h;
      grad(i) = (weak_ratio(m, g, eps, p.normalized()) - weak_ratio(m, g, eps, q.normalized())) /
                (2.0 * h);
    }
    if (!grad.allFinite()) break;
    grad -= grad.dot(phi) * phi;  // tangent to the unit sphere
    const double gn = grad.norm();
    if (gn == 0.0) break;
    Vector trial = (phi + step * grad / gn).normalized();
    const double r = weak_ratio(m, g, eps, trial);
    if (r > best) {
      best = r;
      phi = trial;
    } else {
      step *= 0.5;
    }
  }
  return phi;
}

}  // namespace

const char* to_string(CertStatus status) {
  switch (status) {
    case CertStatus::certified: return "certified";
    case CertStatus::refuted: return "refuted";
    case CertStatus::inconclusive: return "inconclusive";
  }
  return "unknown";
}

const char* to_string(Statement s) {
  switch (s) {
    case Statement::ii_grid: return "(ii)-grid";
    case Statement::iii_grid: return "(iii)-grid";
    case Statement::iv_sequence: return "(iv)-sequence";
  }
  return "unknown";
}

double WeakObsCertificate::residual() const { return c_const * std::exp(-alpha * horizon); }

double weak_ratio(const Matrix& terminal_gram, const Matrix& observation_gram, double eps,
                  const Vector& phi) {
  const Sides s = sides(terminal_gram, observation_gram, phi);
  const double num = s.lhs - eps * phi.norm();
  if (num <= 1e-14 * std::max(s.lhs, 1e-300)) return 0.0;
  if (s.obs <= 0.0) return kInf;
  return num / s.obs;
}

std::pair<double, Vector> sample_best_ratio(const Matrix& terminal_gram,
                                            const Matrix& observation_gram, double eps,
                                            const CheckOptions& opts) {
  const Eigen::Index n = terminal_gram.rows();
  std::vector<Vector> cands = pencil_directions(terminal_gram, observation_gram);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < opts.samples; ++s) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    cands.emplace_back(v.normalized());
  }

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    scored.emplace_back(weak_ratio(terminal_gram, observation_gram, eps, cands[i]), i);
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& x, const auto& y) { return x.first > y.first || (x.first == y.first && x.second < y.second); });

  double best = scored.front().first;
  Vector arg = cands[scored.front().second];
  if (std::isfinite(best)) {
    const std::size_t starts = std::min<std::size_t>(3, scored.size());
    for (std::size_t s = 0; s < starts; ++s) {
      Vector v = ascend(terminal_gram, observation_gram, eps, cands[scored[s].second], opts);
      const double r = weak_ratio(terminal_gram, observation_gram, eps, v);
      if (r > best) {
        best = r;
        arg = v;
      }
    }
  }
  return {best, arg};
}

double sufficient_d(const Matrix& terminal_gram, const Matrix& observation_gram, double eps) {
  const Eigen::Index n = terminal_gram.rows();
  const Matrix base = eps * eps * Matrix::Identity(n, n) - terminal_gram;
  // A quarter of the decision tolerance, so the returned D passes decide_inequality
  // regardless of summation order.
  auto passes = [&](double d) {
    return min_eig(d * d * observation_gram + base) >=
           -0.25 * psd_tolerance(terminal_gram, observation_gram, d, eps);
  };
  if (passes(0.0)) return 0.0;
  double hi = 1.0;
  while (!passes(hi)) {
    hi *= 2.0;
    if (hi > 1e16) return kInf;
  }
  double lo = hi > 1.0 ? hi / 2.0 : 0.0;
  for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (passes(mid) ? hi : lo) = mid;
  }
  return hi;
}

InequalityDecision decide_inequality(const Matrix& terminal_gram, const Matrix& observation_gram,
                                     double d_const, double eps, const CheckOptions& opts) {
  if (terminal_gram.rows() != observation_gram.rows() || terminal_gram.rows() != terminal_gram.cols()) {
    throw DimensionError("Gram matrices must be square and of equal size");
  }
  const Eigen::Index n = terminal_gram.rows();
  InequalityDecision out;
  out.sufficient_margin =
      min_eig(d_const * d_const * observation_gram + eps * eps * Matrix::Identity(n, n) -
              terminal_gram);
  const bool sufficient =
      out.sufficient_margin >= -psd_tolerance(terminal_gram, observation_gram, d_const, eps);

  auto [ratio, phi] = sample_best_ratio(terminal_gram, observation_gram, eps, opts);
  out.best_ratio = ratio;
  const Sides s = sides(terminal_gram, observation_gram, phi);
  const double gap = s.lhs - (d_const * s.obs + eps * phi.norm());
  const bool violated = ratio > d_const && gap > kRefuteRelative * s.lhs;

  if (violated && !sufficient) {
    out.status = CertStatus::refuted;
    out.witness = phi;
  } else if (sufficient && !violated) {
    out.status = CertStatus::certified;
  } else {
    out.status = CertStatus::inconclusive;
  }
  return out;
}

namespace {

struct HorizonGrams {
  Matrix terminal;
  Matrix observation;
};

HorizonGrams grams_at(const LtiSystem& sys, double horizon, const QuadratureSpec& quad) {
  const Matrix e = expm(sys.a(), horizon);
  return HorizonGrams{e * e.transpose(), observability_gramian(sys, horizon, quad).matrix};
}

void require_cert_fields(const WeakObsCertificate& cert) {
  if (!(cert.horizon > 0.0)) throw DomainError("certificate horizon must be positive");
  if (!(cert.alpha > 0.0)) throw DomainError("certificate alpha must be positive");
  if (!(cert.d_const >= 0.0) || !(cert.c_const >= 0.0)) {
    throw DomainError("certificate constants must be nonnegative");
  }
}

void apply(WeakObsCertificate& cert, const InequalityDecision& dec) {
  cert.status = dec.status;
  cert.sufficient_margin = dec.sufficient_margin;
  cert.best_ratio = dec.best_ratio;
  cert.margin = dec.status == CertStatus::certified ? dec.sufficient_margin
                                                    : cert.d_const - dec.best_ratio;
  cert.witness = dec.witness;
}

}  // namespace

WeakObsCertificate check_certificate(const LtiSystem& sys, const WeakObsCertificate& cert,
                                     const CheckOptions& opts) {
  require_cert_fields(cert);
  const HorizonGrams g = grams_at(sys, cert.horizon, opts.quad);
  WeakObsCertificate out = cert;
  apply(out, decide_inequality(g.terminal, g.observation, cert.d_const, cert.residual(), opts));
  return out;
}

double violation(const LtiSystem& sys, const WeakObsCertificate& cert, const Vector& phi,
                 const QuadratureSpec& quad) {
  const double lhs = propagate(sys, cert.horizon, phi, /*adjoint=*/true).norm();
  const double energy = observation_energy(sys, cert.horizon, phi, quad);
  return lhs - (cert.d_const * std::sqrt(energy) + cert.residual() * phi.norm());
}

DBracket optimal_d_bracket(const LtiSystem& sys, double horizon, double eps,
                           const CheckOptions& opts) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  if (!(eps >= 0.0)) throw DomainError("residual must be nonnegative");
  const HorizonGrams g = grams_at(sys, horizon, opts.quad);
  DBracket out;
  out.d_lo = std::max(0.0, sample_best_ratio(g.terminal, g.observation, eps, opts).first);
  out.d_hi = sufficient_d(g.terminal, g.observation, eps);
  return out;
}

ResidualRule unit_residual_rule() { return ResidualRule{}; }

ResidualRule table_residual_rule(std::vector<std::pair<double, double>> alpha_to_c) {
  ResidualRule rule;
  rule.name = "table";
  rule.constant = [table = std::move(alpha_to_c)](double alpha) {
    for (const auto& [a, c] : table) {
      if (std::abs(a - alpha) <= 1e-12 * std::max(1.0, std::abs(alpha))) return c;
    }
    throw DomainError("residual table has no entry for alpha = " + std::to_string(alpha));
  };
  return rule;
}

std::vector<double> default_alpha_grid() { return {0.5, 1.0, 2.0, 4.0, 8.0}; }
std::vector<double> default_horizon_grid() { return {0.5, 1.0, 2.0, 4.0}; }

const WeakObsCertificate& CertificateFamily::at(std::size_t alpha_index,
                                                std::size_t horizon_index) const {
  return certificates.at(alpha_index * horizons.size() + horizon_index);
}

namespace {

void require_increasing(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw DomainError(std::string(what) + " grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw DomainError(std::string(what) + " grid must be strictly increasing");
  }
}

CertStatus combine(const std::vector<CertStatus>& parts) {
  bool all_certified = true;
  for (CertStatus s : parts) {
    if (s == CertStatus::refuted) return CertStatus::refuted;
    if (s != CertStatus::certified) all_certified = false;
  }
  return all_certified ? CertStatus::certified : CertStatus::inconclusive;
}

}  // namespace

CertificateFamily sweep_alpha(const LtiSystem& sys, const std::vector<double>& alphas,
                              const std::vector<double>& horizons,
                              const ResidualRule& residual_rule, const SweepOptions& opts) {
  require_increasing(alphas, "alpha");
  for (double a : alphas) {
    if (!(a > 0.0)) throw DomainError("alpha grid must be positive");
  }
  std::vector<double> hs;
  for (double t : horizons) {
    if (opts.statement != Statement::iii_grid || t > opts.t0) hs.push_back(t);
  }
  require_increasing(hs, "horizon");
  if (!(hs.front() > 0.0)) throw DomainError("horizons must be positive");

  CertificateFamily fam;
  fam.alphas = alphas;
  fam.horizons = hs;
  fam.statement = opts.statement;
  fam.t0 = opts.t0;
  fam.residual_source = residual_rule.name;

  std::vector<HorizonGrams> grams(hs.size());
  detail::parallel_for(hs.size(), opts.threads,
                       [&](std::size_t i) { grams[i] = grams_at(sys, hs[i], opts.check.quad); });

  fam.certificates.resize(alphas.size() * hs.size());
  fam.per_alpha.resize(alphas.size());
  detail::parallel_for(alphas.size(), opts.threads, [&](std::size_t ai) {
    const double alpha = alphas[ai];
    const double c = residual_rule.constant(alpha);
    std::vector<double> d_t(hs.size());
    double common = 0.0;
    double finite_max = 0.0;
    for (std::size_t ti = 0; ti < hs.size(); ++ti) {
      const double eps = c * std::exp(-alpha * hs[ti]);
      d_t[ti] = sufficient_d(grams[ti].terminal, grams[ti].observation, eps);
      common = std::max(common, d_t[ti]);
      if (std::isfinite(d_t[ti])) finite_max = std::max(finite_max, d_t[ti]);
    }
    std::vector<CertStatus> parts;
    for (std::size_t ti = 0; ti < hs.size(); ++ti) {
      WeakObsCertificate cert;
      cert.horizon = hs[ti];
      cert.alpha = alpha;
      cert.c_const = c;
      if (opts.statement == Statement::iii_grid) {
        cert.d_const = std::isfinite(d_t[ti]) ? d_t[ti] : finite_max;
      } else {
        cert.d_const = std::isfinite(common) ? common : finite_max;
      }
      CheckOptions co = opts.check;
      co.seed = opts.check.seed + 1000003ULL * (ai * hs.size() + ti);
      apply(cert, decide_inequality(grams[ti].terminal, grams[ti].observation, cert.d_const,
                                    cert.residual(), co));
      parts.push_back(cert.status);
      fam.certificates[ai * hs.size() + ti] = std::move(cert);
    }
    AlphaVerdict v;
    v.alpha = alpha;
    v.c_const = c;
    v.d_const = common;
    v.status = combine(parts);
    fam.per_alpha[ai] = v;
  });

  std::vector<CertStatus> verdicts;
  for (const auto& v : fam.per_alpha) verdicts.push_back(v.status);
  fam.verdict = combine(verdicts);
  return fam;
}

std::vector<SequenceEntry> discrete_sequence(const CertificateFamily& family, int k_max) {
  if (family.certificates.empty()) throw DomainError("certificate family is empty");
  std::vector<SequenceEntry> out;
  for (int k = 1; k <= k_max; ++k) {
    const double target = k + 1.0;
    auto it = std::find_if(family.alphas.begin(), family.alphas.end(),
                           [&](double a) { return std::abs(a - target) <= 1e-12 * target; });
    if (it == family.alphas.end()) continue;
    const auto ai = static_cast<std::size_t>(it - family.alphas.begin());
    bool found = false;
    for (std::size_t ti = 0; ti < family.horizons.size(); ++ti) {
      const WeakObsCertificate& cert = family.at(ai, ti);
      const double t = family.horizons[ti];
      if (t > family.t0 && cert.c_const < std::exp(t) && cert.status == CertStatus::certified) {
        out.push_back(SequenceEntry{k, t, cert.d_const});
        found = true;
        break;
      }
    }
    if (!found) {
      throw DomainError("no admissible certified horizon T_k for k = " + std::to_string(k));
    }
  }
  if (out.empty()) throw DomainError("certificate family has no entry at alpha = k + 1");
  return out;
}

}  // namespace stabcert

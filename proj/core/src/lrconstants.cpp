#include "stabcert/lrconstants.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "stabcert/error.hpp"
#include "stabcert/semigroup.hpp"

namespace stabcert {

namespace {

void require_bound(const SemigroupBound& b) {
  if (!(b.m_big >= 1.0)) throw DomainError("semigroup bound needs M >= 1");
  if (!(b.delta0 >= 0.0)) throw DomainError("semigroup bound needs delta0 >= 0");
}

void require_compatible(double alpha_k, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (!(alpha_k > alpha)) {
    throw DomainError("dissipative rate alpha_k must exceed alpha (choose a larger k)");
  }
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) throw DomainError(std::string(what) + " must be nonnegative");
}

}  // namespace

SemigroupBound fit_semigroup_bound(const LtiSystem& sys, double horizon, int points, double slack) {
  if (!(horizon > 0.0) || points < 2) throw DomainError("semigroup fit needs a positive grid");
  Eigen::EigenSolver<Matrix> es(sys.a(), /*computeEigenvectors=*/false);
  const double abscissa = es.eigenvalues().real().maxCoeff();
  SemigroupBound b;
  b.delta0 = std::max(0.0, abscissa) + slack;
  b.m_big = 1.0;
  for (int i = 0; i < points; ++i) {
    const double t = horizon * i / (points - 1);
    const Matrix e = expm(sys.a(), t);
    Eigen::JacobiSVD<Matrix> svd(e);
    b.m_big = std::max(b.m_big, svd.singularValues()(0) * std::exp(-b.delta0 * t));
  }
  return b;
}

CertificateConstants constants_b1(const SemigroupBound& bound, double m_k, double alpha_k,
                                  double c_k, double b_norm, double alpha) {
  require_bound(bound);
  require_compatible(alpha_k, alpha);
  require_nonnegative(m_k, "M_k");
  require_nonnegative(c_k, "C_k");
  require_nonnegative(b_norm, "|B|");
  const double m = bound.m_big;
  CertificateConstants out;
  out.d_const = std::numbers::sqrt2 * m * c_k * std::exp(bound.delta0);
  out.c_const = m * m_k * std::exp(bound.delta0 + alpha) *
                std::sqrt(2.0 * c_k * c_k * b_norm * b_norm + 1.0);
  out.t_min = 1.0;
  out.t_min_inclusive = false;
  return out;
}

CertificateConstants constants_b2(const SemigroupBound& bound, double t0, double c_k_t0,
                                  double m_k, double alpha_k, double b_norm, double alpha) {
  require_bound(bound);
  require_compatible(alpha_k, alpha);
  if (!(t0 > 0.0)) throw DomainError("T0 must be positive");
  require_nonnegative(c_k_t0, "C(k,T0)");
  require_nonnegative(m_k, "M_k");
  require_nonnegative(b_norm, "|B*|");
  const double m = bound.m_big;
  CertificateConstants out;
  out.d_const = m * std::exp(bound.delta0 * t0) * std::sqrt(c_k_t0);
  out.c_const = m * m_k * std::exp((bound.delta0 + alpha) * t0) *
                std::sqrt(c_k_t0 * b_norm * b_norm * t0 * std::exp(2.0 * alpha * t0) + 1.0);
  out.t_min = 2.0 * t0;
  out.t_min_inclusive = true;
  return out;
}

CertificateConstants constants_unbounded(const SemigroupBound& bound,
                                         const UnboundedConstantsSpec& spec, double t0,
                                         double c_k_t0, double m_k, double alpha) {
  require_bound(bound);
  validate(spec);
  if (!(t0 > 0.0)) throw DomainError("T0 must be positive");
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  require_nonnegative(c_k_t0, "C(k,T0)");
  require_nonnegative(m_k, "M_k");
  const double m = bound.m_big;
  const double inner = c_k_t0 * spec.b_norm * spec.b_norm * spec.c_gamma * spec.c_gamma *
                       std::exp(2.0 * (spec.rho0 + 2.0 * alpha) * t0) *
                       std::pow(t0, 1.0 - 2.0 * spec.gamma);
  CertificateConstants out;
  out.d_const = m * std::exp(bound.delta0 * t0) * std::sqrt(c_k_t0);
  out.c_const = m * m_k * std::exp((bound.delta0 + alpha) * t0) * std::sqrt(inner + 1.0);
  out.t_min = 2.0 * t0;
  out.t_min_inclusive = true;
  return out;
}

double admissibility_constant(const UnboundedConstantsSpec& spec, double horizon) {
  validate(spec);
  if (spec.gamma > 0.499) throw DomainError("gamma too close to 1/2: C(T, gamma) diverges");
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  return spec.b_norm * spec.b_norm * spec.c_gamma * spec.c_gamma *
         std::exp(2.0 * spec.rho0 * horizon) * std::pow(horizon, 1.0 - 2.0 * spec.gamma) /
         (1.0 - 2.0 * spec.gamma);
}

SpectralConstant estimate_spectral_constant(const SpectralSystem& spec,
                                            const ProjectionFamily& fam, int k) {
  const auto& idx = fam.range(k);
  SpectralConstant out;
  if (idx.empty()) return out;  // P_k = 0: inequality holds with any constant
  Matrix rows(static_cast<Eigen::Index>(idx.size()), spec.control_rows.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= spec.modes()) throw DimensionError("projection range exceeds truncation");
    rows.row(static_cast<Eigen::Index>(i)) = spec.control_rows.row(idx[i]);
  }
  // B* P_k phi = rows^T phi_P; its smallest singular value over R^{|P_k|}.
  const Eigen::Index dim = rows.rows();
  double sigma = 0.0;
  if (dim <= rows.cols()) {
    Eigen::JacobiSVD<Matrix> svd(rows);
    sigma = svd.singularValues()(dim - 1);
  }
  const double scale = std::max(1.0, spec.control_rows.norm());
  out.sigma_min = sigma;
  if (sigma <= 1e-13 * scale) {
    out.singular = true;
    out.value = std::numeric_limits<double>::infinity();
  } else {
    out.value = 1.0 / sigma;
  }
  return out;
}

double exponential_gram_entry(double a, double b, double t0) {
  // int_0^t0 e^{-s t} dt = (1 - e^{-s t0}) / s
  return exp_ratio(-(a + b), t0);
}

FattoriniDistance fattorini_distance(const std::vector<double>& rates, double t0, std::size_t j,
                                     const std::vector<std::size_t>& pool) {
  if (!(t0 > 0.0)) throw DomainError("T0 must be positive");
  if (j >= rates.size()) throw DomainError("mode index out of range");
  for (std::size_t i : pool) {
    if (i == j) throw DomainError("pool must exclude the target mode");
    if (i >= rates.size()) throw DomainError("pool index out of range");
  }
  const double gjj = exponential_gram_entry(rates[j], rates[j], t0);
  FattoriniDistance out;
  if (pool.empty()) {
    out.distance = std::sqrt(gjj);
    return out;
  }
  const auto p = static_cast<Eigen::Index>(pool.size());
  Matrix gpp(p, p);
  Vector gpj(p);
  for (Eigen::Index r = 0; r < p; ++r) {
    gpj(r) = exponential_gram_entry(rates[pool[r]], rates[j], t0);
    for (Eigen::Index c = 0; c < p; ++c) {
      gpp(r, c) = exponential_gram_entry(rates[pool[r]], rates[pool[c]], t0);
    }
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(gpp);
  qr.setThreshold(1e-14);
  const Vector rdiag = qr.matrixR().diagonal().cwiseAbs();
  const double rmax = rdiag.maxCoeff();
  const double rmin = rdiag.minCoeff();
  out.condition = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  out.ill_conditioned = out.condition > 1e14;
  const Vector x = qr.solve(gpj);
  const double d2 = gjj - gpj.dot(x);
  out.distance = std::sqrt(std::max(0.0, d2));
  return out;
}

double pointwise_c_kt0(double x0, double c, int k, double t0) {
  if (!(x0 > 0.0 && x0 < 1.0)) throw DomainError("x0 must lie strictly inside (0, 1)");
  if (!(t0 > 0.0)) throw DomainError("T0 must be positive");
  if (k < 0) throw DomainError("k must be nonnegative");
  std::vector<double> rates(static_cast<std::size_t>(k));
  std::vector<double> phis(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j) {
    const double s = std::sin(j * std::numbers::pi * x0);
    if (std::abs(s) <= 1e-12) {
      throw VanishingModeError("eigenfunction " + std::to_string(j) +
                                   " vanishes at x0: truncated observability fails",
                               j);
    }
    phis[static_cast<std::size_t>(j - 1)] = std::numbers::sqrt2 * s;
    rates[static_cast<std::size_t>(j - 1)] = (j * std::numbers::pi) * (j * std::numbers::pi) - c;
  }
  double total = 0.0;
  for (std::size_t j = 0; j < rates.size(); ++j) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      if (i != j) pool.push_back(i);
    }
    const double d = fattorini_distance(rates, t0, j, pool).distance;
    if (d <= 0.0) return std::numeric_limits<double>::infinity();
    total += std::exp(-2.0 * rates[j] * t0) / (d * d * phis[j] * phis[j]);
  }
  return total;
}

}  // namespace stabcert

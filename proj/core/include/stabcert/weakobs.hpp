#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stabcert/quadrature.hpp"
#include "stabcert/systems.hpp"

namespace stabcert {

enum class CertStatus { certified, refuted, inconclusive };

const char* to_string(CertStatus status);

/// Claim |S(T)* phi| <= D |B* S(T - .)* phi|_{L2(0,T)} + C exp(-alpha T) |phi|.
struct WeakObsCertificate {
  double horizon = 1.0;
  double alpha = 1.0;
  double d_const = 0.0;
  double c_const = 1.0;
  /// Smallest slack found: the sufficient-test eigenvalue when certified,
  /// D - (best sampled ratio) otherwise.
  double margin = 0.0;
  double sufficient_margin = 0.0;
  double best_ratio = 0.0;
  CertStatus status = CertStatus::inconclusive;
  std::optional<Vector> witness;

  double residual() const;  ///< C exp(-alpha T)
};

/// Knobs for the two-sided decision procedure.
struct CheckOptions {
  int samples = 200;
  std::uint64_t seed = 12345;
  int ascent_iterations = 20;
  double ascent_step = 0.1;
  QuadratureSpec quad{};
};

/// Two-sided test of |Phi* psi| <= D sqrt(<G psi, psi>) + eps |psi| given the
/// terminal Gram matrix M = Phi Phi^T and the observation Gram matrix G.
struct InequalityDecision {
  CertStatus status = CertStatus::inconclusive;
  double sufficient_margin = 0.0;  ///< lambda_min(D^2 G + eps^2 I - M)
  double best_ratio = 0.0;         ///< max sampled (|Phi* psi| - eps|psi|)_+ / sqrt(<G psi,psi>)
  std::optional<Vector> witness;
};

InequalityDecision decide_inequality(const Matrix& terminal_gram, const Matrix& observation_gram,
                                     double d_const, double eps, const CheckOptions& opts);

/// Sampled ratio r(phi) on precomputed Gram matrices; +inf when the
/// observation vanishes while the numerator is positive.
double weak_ratio(const Matrix& terminal_gram, const Matrix& observation_gram, double eps,
                  const Vector& phi);

/// Best sampled ratio and its maximizer (random + pencil + local ascent).
std::pair<double, Vector> sample_best_ratio(const Matrix& terminal_gram,
                                            const Matrix& observation_gram, double eps,
                                            const CheckOptions& opts);

/// Smallest D with D^2 G + eps^2 I - M positive semidefinite, by bisection.
/// +inf when no finite D passes.
double sufficient_d(const Matrix& terminal_gram, const Matrix& observation_gram, double eps);

WeakObsCertificate check_certificate(const LtiSystem& sys, const WeakObsCertificate& cert,
                                     const CheckOptions& opts = {});

/// Re-evaluates the inequality at phi with propagate() and quadrature only.
/// Returns lhs - rhs (positive means phi violates the claim).
double violation(const LtiSystem& sys, const WeakObsCertificate& cert, const Vector& phi,
                 const QuadratureSpec& quad = {});

struct DBracket {
  double d_lo = 0.0;
  double d_hi = 0.0;
};

DBracket optimal_d_bracket(const LtiSystem& sys, double horizon, double eps,
                           const CheckOptions& opts = {});

/// C(alpha) supplied to the sweep, with a name recorded in reports.
struct ResidualRule {
  std::string name = "unit";
  std::function<double(double)> constant = [](double) { return 1.0; };
};

ResidualRule unit_residual_rule();
ResidualRule table_residual_rule(std::vector<std::pair<double, double>> alpha_to_c);

enum class Statement { ii_grid, iii_grid, iv_sequence };

const char* to_string(Statement s);

struct AlphaVerdict {
  double alpha = 0.0;
  double c_const = 0.0;
  double d_const = 0.0;  ///< common D over the grid, +inf if none found
  CertStatus status = CertStatus::inconclusive;
};

struct CertificateFamily {
  std::vector<double> alphas;
  std::vector<double> horizons;
  std::vector<WeakObsCertificate> certificates;  ///< alpha-major order
  std::vector<AlphaVerdict> per_alpha;
  Statement statement = Statement::ii_grid;
  double t0 = 0.0;
  std::string residual_source;
  CertStatus verdict = CertStatus::inconclusive;

  const WeakObsCertificate& at(std::size_t alpha_index, std::size_t horizon_index) const;
};

struct SweepOptions {
  CheckOptions check{};
  /// ii_grid: one D per alpha valid for every horizon; iii_grid: D(alpha,T)
  /// per horizon, horizons restricted to T > t0.
  Statement statement = Statement::ii_grid;
  double t0 = 0.0;
  unsigned threads = 1;
};

CertificateFamily sweep_alpha(const LtiSystem& sys, const std::vector<double>& alphas,
                              const std::vector<double>& horizons,
                              const ResidualRule& residual_rule = unit_residual_rule(),
                              const SweepOptions& opts = {});

std::vector<double> default_alpha_grid();
std::vector<double> default_horizon_grid();

struct SequenceEntry {
  int k = 0;
  double t_k = 0.0;
  double d_k = 0.0;
};

/// Picks, for each k <= k_max whose alpha = k + 1 appears in the family, the
/// smallest certified horizon T_k > t0 with C(k+1) < exp(T_k) and sets
/// D(k) = D(k+1, T_k).
std::vector<SequenceEntry> discrete_sequence(const CertificateFamily& family, int k_max);

}  // namespace stabcert

#pragma once

#include <optional>
#include <vector>

#include "stabcert/projection.hpp"
#include "stabcert/systems.hpp"

namespace stabcert {

/// |S(t)| <= M exp(delta0 t).
struct SemigroupBound {
  double m_big = 1.0;
  double delta0 = 0.0;
};

/// Fits M on a uniform grid of [0, horizon] with delta0 = max(0, spectral
/// abscissa) + slack.
SemigroupBound fit_semigroup_bound(const LtiSystem& sys, double horizon = 10.0, int points = 200,
                                   double slack = 1e-9);

/// Constants D(alpha), C(alpha) of a weak observability inequality and the
/// horizon range where they are valid (T > t_min, or T >= t_min when
/// `t_min_inclusive`).
struct CertificateConstants {
  double d_const = 0.0;
  double c_const = 0.0;
  double t_min = 0.0;
  bool t_min_inclusive = false;

  bool valid_for(double horizon) const {
    return t_min_inclusive ? horizon >= t_min : horizon > t_min;
  }
};

/// Spectral-inequality route (b1): D = sqrt2 M C_k e^{delta0},
/// C = M M_k e^{delta0 + alpha} sqrt(2 C_k^2 |B|^2 + 1), valid for T > 1.
CertificateConstants constants_b1(const SemigroupBound& bound, double m_k, double alpha_k,
                                  double c_k, double b_norm, double alpha);

/// Truncated-observability route (b2): D = M e^{delta0 T0} sqrt(C(k,T0)),
/// C = M M_k e^{(delta0+alpha)T0} sqrt(C(k,T0) |B*|^2 T0 e^{2 alpha T0} + 1),
/// valid for T >= 2 T0.
CertificateConstants constants_b2(const SemigroupBound& bound, double t0, double c_k_t0,
                                  double m_k, double alpha_k, double b_norm, double alpha);

/// Unbounded-control variant of (b2) with B in L(U; X_{-gamma}).
CertificateConstants constants_unbounded(const SemigroupBound& bound,
                                         const UnboundedConstantsSpec& spec, double t0,
                                         double c_k_t0, double m_k, double alpha);

/// C(T, gamma) = b^2 C(gamma)^2 e^{2 rho0 T} T^{1-2gamma} / (1 - 2 gamma).
double admissibility_constant(const UnboundedConstantsSpec& spec, double horizon);

struct SpectralConstant {
  double value = 0.0;  ///< +inf when B* is not injective on range(P_k)
  bool singular = false;
  double sigma_min = 0.0;
};

/// C_k = 1 / sigma_min(B* restricted to range P_k).
SpectralConstant estimate_spectral_constant(const SpectralSystem& spec,
                                            const ProjectionFamily& fam, int k);

struct FattoriniDistance {
  double distance = 0.0;
  double condition = 1.0;  ///< condition estimate of the pool Gram matrix
  bool ill_conditioned = false;
};

/// L2(0, t0) distance from exp(-lambda_j t) to span{exp(-lambda_i t): i in pool}.
/// Indices are 0-based into `rates`.
FattoriniDistance fattorini_distance(const std::vector<double>& rates, double t0, std::size_t j,
                                     const std::vector<std::size_t>& pool);

/// Exponential Gram entry int_0^t0 exp(-(a + b) t) dt.
double exponential_gram_entry(double a, double b, double t0);

/// C(k,T0) = sum_j exp(-2 lambda_j T0) / (d_j^2 |phi_j(x0)|^2) for the point
/// heat system with phi_j = sqrt2 sin(j pi x) and decay rates (j pi)^2 - c.
/// Throws VanishingModeError naming the first j with sin(j pi x0) = 0.
double pointwise_c_kt0(double x0, double c, int k, double t0);

}  // namespace stabcert

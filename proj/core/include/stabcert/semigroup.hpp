#pragma once

#include <cstdint>
#include <vector>

#include "stabcert/projection.hpp"
#include "stabcert/quadrature.hpp"
#include "stabcert/systems.hpp"

namespace stabcert {

/// Matrix exponential exp(A t). Diagonal inputs are exponentiated entrywise.
Matrix expm(const Matrix& a, double t = 1.0);

/// S(t) x = exp(A t) x, or S(t)* x = exp(A^T t) x when `adjoint` is set.
Vector propagate(const LtiSystem& sys, double t, const Vector& x, bool adjoint = false);

/// Observation energy  int_0^T |B^T exp(A^T t) phi|^2 dt  by quadrature.
double observation_energy(const LtiSystem& sys, double horizon, const Vector& phi,
                          const QuadratureSpec& quad = {});

struct GramianResult {
  Matrix matrix;
  double horizon = 0.0;
  double quadrature_error_estimate = 0.0;
};

enum class GramianMethod { automatic, closed_form, quadrature };

/// G(T) = int_0^T exp(A t) B B^T exp(A^T t) dt.
///
/// `automatic` uses the closed form on diagonal systems and adaptive
/// quadrature otherwise. The same matrix is the controllability Gramian
/// used for minimum-norm steering.
GramianResult observability_gramian(const LtiSystem& sys, double horizon,
                                    const QuadratureSpec& quad = {},
                                    GramianMethod method = GramianMethod::automatic);

/// (exp(s T) - 1) / s with the s -> 0 limit taken by series.
double exp_ratio(double s, double horizon);

struct TailCheckReport {
  double worst_ratio = 0.0;
  int worst_k = 0;
  double worst_t = 0.0;
  std::vector<double> worst_ratio_per_k;
  int violations = 0;
  int evaluations = 0;
};

/// |(I - P_k) S(t)* phi| / (M_k exp(-alpha_k t) |phi|) for one phi; 0 when
/// the tail of phi vanishes.
double tail_ratio(const SpectralSystem& spec, const ProjectionFamily& fam, int k, double t,
                  const Vector& phi);

/// Samples |(I - P_k) S(t)* phi| / (M_k exp(-alpha_k t) |phi|) over random
/// phi and the given time grid for every k of the family.
TailCheckReport dissipative_tail_check(const SpectralSystem& spec, const ProjectionFamily& fam,
                                       const std::vector<double>& t_grid, int samples,
                                       std::uint64_t seed = 7);

}  // namespace stabcert

#pragma once

#include <optional>
#include <vector>

#include "stabcert/quadrature.hpp"
#include "stabcert/systems.hpp"
#include "stabcert/weakobs.hpp"

namespace stabcert {

/// Periodic system y' = diag(a) y + B(t) u with diagonal, piecewise-constant
/// B(t): channel n is active while the phase t mod period lies in window n.
struct PeriodicSystem {
  double period = 1.0;
  Vector a_diag;
  std::vector<Interval> windows;  ///< one per mode, inside [0, period]

  // Switching-example metadata; empty for generic systems.
  std::vector<double> switch_times;  ///< tau_0 = 1 > tau_1 > ... > tau_N
  std::optional<double> alpha_series;
  double series_tail_bound = 0.0;
  int series_terms = 0;

  Eigen::Index modes() const noexcept { return a_diag.size(); }
  bool is_example4() const noexcept { return alpha_series.has_value(); }
};

void validate(const PeriodicSystem& sys);

/// Switching example: A = -diag(1..n), window of mode n is (tau_n, tau_{n-1}) with
/// tau_n = (1/alpha) sum_{k>n} e^{-k^2}.
PeriodicSystem build_example4(int n, int series_terms = 12);

/// Piecewise-constant periodic generator: generators[i] acts on
/// [breakpoints[i], breakpoints[i+1]) of each period.
struct PiecewiseGenerator {
  double period = 1.0;
  std::vector<double> breakpoints;  ///< starts at 0, ends at period
  std::vector<Matrix> generators;
};

void validate(const PiecewiseGenerator& gen);

/// Evolution operator Phi(t, s), 0 <= s <= t, as an ordered product of
/// matrix exponentials over the pieces met between s and t.
Matrix periodic_evolution(const PiecewiseGenerator& gen, double t, double s);

/// Phi(t, s) = diag(exp(a_n (t - s))) for a time-invariant diagonal generator.
Matrix periodic_evolution(const PeriodicSystem& sys, double t, double s);

/// Per-mode energies g_n = int_0^{m period} |B(t)* Phi(m period, t)* e_n|^2 dt.
Vector periodic_mode_energies(const PeriodicSystem& sys, int m);

/// int_0^{m period} |B(t)* Phi(m period, t)* psi|^2 dt in closed form.
double periodic_observation_energy(const PeriodicSystem& sys, int m, const Vector& psi);

/// Same quantity by panel quadrature split at the window boundaries.
double periodic_observation_energy_quadrature(const PeriodicSystem& sys, int m,
                                              const Vector& psi, const QuadratureSpec& quad = {});

struct NullControllabilityWitness {
  int n = 0;  ///< 1-based mode index
  double lhs = 0.0;
  double rhs = 0.0;
  double energy = 0.0;
  double energy_bound = 0.0;  ///< e^{-n^2} / (alpha (1 - e^{-2n}))
  bool extended = false;      ///< truncation grown to reach mode n
};

/// Smallest n with n >= m + sqrt(m^2 + 2 ln C + ln(2/alpha)); lhs = e^{-nm},
/// rhs = C sqrt(energy of e_n over m periods).
NullControllabilityWitness noncontrollability_witness(const PeriodicSystem& sys, int m,
                                                      double big_c, bool auto_extend = true);

struct ModeMargin {
  int n = 0;
  double energy = 0.0;
  double energy_lower_bound = 0.0;  ///< (a_n / alpha) e^{-2n}
  double key_factor = 0.0;          ///< C(k)^2 a_n / alpha = e^{k^2 - n^2}
  bool key_fact_holds = false;
};

struct PeriodicCertificate {
  int k = 0;
  int n_k = 1;
  double c_k = 0.0;
  double margin = 0.0;
  double sufficient_margin = 0.0;
  double best_ratio = 0.0;
  CertStatus status = CertStatus::inconclusive;
  std::optional<Vector> witness;
  std::vector<ModeMargin> mode_margins;  ///< switching example only
};

/// C(k) = sqrt(alpha) e^{k^2/2}.
double example4_constant(const PeriodicSystem& sys, int k);

PeriodicCertificate example4_stabilizability_check(const PeriodicSystem& sys, int k,
                                                   int samples = 200, std::uint64_t seed = 99);

/// |Phi(n_k T, 0)* psi| <= C(k) |B* Phi(n_k T, .)* psi|_{L2(0, n_k T)} + e^{-k n_k T} |psi|.
PeriodicCertificate periodic_weakobs_check(const PeriodicSystem& sys, int k, int n_k, double c_k,
                                           int samples = 200, std::uint64_t seed = 99);

}  // namespace stabcert

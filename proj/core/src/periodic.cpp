#include "stabcert/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stabcert/error.hpp"
#include "stabcert/semigroup.hpp"

namespace stabcert {

namespace {

// Integral of e^{2a(T - s)} over [lo, hi]; a = 0 gives the window length.
double window_integral(double a, double period, double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (std::abs(a) * (hi - lo) < 1e-8) {
    // e^{2a(T-hi)} * (hi - lo) * (1 + a(hi-lo) + ...)
    const double w = hi - lo;
    return std::exp(2.0 * a * (period - hi)) * w * (1.0 + a * w + (2.0 / 3.0) * a * a * w * w);
  }
  return std::exp(2.0 * a * (period - hi)) * std::expm1(2.0 * a * (hi - lo)) / (2.0 * a);
}

// sum_{k=0}^{m-1} e^{2 a k T}
double period_sum(double a, double period, int m) {
  const double x = 2.0 * a * period;
  if (std::abs(x) < 1e-12) return m;
  return std::expm1(m * x) / std::expm1(x);
}

void check_mode_vector(const PeriodicSystem& sys, const Vector& psi) {
  if (psi.size() != sys.modes()) {
    throw DimensionError("state vector has " + std::to_string(psi.size()) + " entries, system has " +
                         std::to_string(sys.modes()) + " modes");
  }
}

}  // namespace

void validate(const PeriodicSystem& sys) {
  if (!(sys.period > 0.0)) throw DomainError("period must be positive");
  if (static_cast<Eigen::Index>(sys.windows.size()) != sys.modes()) {
    throw DimensionError("need one control window per mode");
  }
  for (const Interval& w : sys.windows) {
    if (!(w.lo >= 0.0 && w.hi <= sys.period && w.lo <= w.hi)) {
      throw DomainError("control window must lie inside one period");
    }
  }
  if (!sys.is_example4()) return;
  const double alpha = *sys.alpha_series;
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("series normalizer must lie in (0, 1)");
  const auto& tau = sys.switch_times;
  if (tau.empty() || tau.front() != 1.0) throw DomainError("switching times must start at 1");
  for (std::size_t i = 1; i < tau.size(); ++i) {
    if (!(tau[i] > 0.0 && tau[i] < tau[i - 1])) {
      throw DomainError("switching times must be positive and strictly decreasing");
    }
  }
}

PeriodicSystem build_example4(int n, int series_terms) {
  if (n < 1) throw DomainError("need at least one mode");
  if (series_terms < n + 2) {
    throw DomainError("series_terms must be at least n + 2 (got " + std::to_string(series_terms) +
                      " for n = " + std::to_string(n) + ")");
  }
  // Tails summed from the smallest term up.
  std::vector<double> tail(static_cast<std::size_t>(series_terms) + 1, 0.0);
  for (int k = series_terms; k >= 1; --k) {
    tail[k - 1] = tail[k] + std::exp(-static_cast<double>(k) * k);
  }
  const double alpha = tail[0];

  PeriodicSystem sys;
  sys.period = 1.0;
  sys.a_diag.resize(n);
  sys.switch_times.assign(static_cast<std::size_t>(n) + 1, 1.0);
  for (int j = 1; j <= n; ++j) {
    sys.a_diag(j - 1) = -static_cast<double>(j);
    sys.switch_times[j] = tail[j] / alpha;
    sys.windows.push_back({sys.switch_times[j], sys.switch_times[j - 1]});
  }
  sys.alpha_series = alpha;
  const double next = series_terms + 1.0;
  sys.series_tail_bound = std::exp(-next * next) / -std::expm1(-(2.0 * next + 1.0));
  sys.series_terms = series_terms;
  validate(sys);
  return sys;
}

void validate(const PiecewiseGenerator& gen) {
  if (!(gen.period > 0.0)) throw DomainError("period must be positive");
  const auto& bp = gen.breakpoints;
  if (bp.size() < 2 || bp.size() != gen.generators.size() + 1) {
    throw DimensionError("need one generator per piece and pieces+1 breakpoints");
  }
  if (bp.front() != 0.0 || bp.back() != gen.period) {
    throw DomainError("breakpoints must start at 0 and end at the period");
  }
  for (std::size_t i = 1; i < bp.size(); ++i) {
    if (!(bp[i] > bp[i - 1])) throw DomainError("breakpoints must increase strictly");
  }
  const Eigen::Index n = gen.generators.front().rows();
  for (const Matrix& g : gen.generators) {
    if (g.rows() != n || g.cols() != n) throw DimensionError("generators must share one square shape");
  }
}

Matrix periodic_evolution(const PiecewiseGenerator& gen, double t, double s) {
  validate(gen);
  if (s < 0.0 || s > t) throw DomainError("evolution needs 0 <= s <= t");
  const Eigen::Index n = gen.generators.front().rows();
  const auto& bp = gen.breakpoints;
  const std::size_t pieces = gen.generators.size();

  Matrix phi = Matrix::Identity(n, n);
  double p = std::floor(s / gen.period);
  const double phase = s - p * gen.period;
  std::size_t i = static_cast<std::size_t>(std::upper_bound(bp.begin(), bp.end(), phase) - bp.begin());
  i = std::clamp<std::size_t>(i, 1, pieces) - 1;

  double cur = s;
  while (cur < t) {
    const double end = std::min(p * gen.period + bp[i + 1], t);
    if (end > cur) {
      phi = expm(gen.generators[i], end - cur) * phi;
      cur = end;
    }
    if (++i == pieces) {
      i = 0;
      p += 1.0;
    }
  }
  return phi;
}

Matrix periodic_evolution(const PeriodicSystem& sys, double t, double s) {
  if (s < 0.0 || s > t) throw DomainError("evolution needs 0 <= s <= t");
  return (sys.a_diag.array() * (t - s)).exp().matrix().asDiagonal();
}

Vector periodic_mode_energies(const PeriodicSystem& sys, int m) {
  if (m < 1) throw DomainError("need at least one period");
  Vector out(sys.modes());
  for (Eigen::Index n = 0; n < sys.modes(); ++n) {
    const double a = sys.a_diag(n);
    const Interval& w = sys.windows[static_cast<std::size_t>(n)];
    out(n) = period_sum(a, sys.period, m) * window_integral(a, sys.period, w.lo, w.hi);
  }
  return out;
}

double periodic_observation_energy(const PeriodicSystem& sys, int m, const Vector& psi) {
  check_mode_vector(sys, psi);
  return periodic_mode_energies(sys, m).dot(psi.cwiseAbs2());
}

double periodic_observation_energy_quadrature(const PeriodicSystem& sys, int m,
                                              const Vector& psi, const QuadratureSpec& quad) {
  if (m < 1) throw DomainError("need at least one period");
  check_mode_vector(sys, psi);
  const double horizon = m * sys.period;
  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    for (Eigen::Index n = 0; n < sys.modes(); ++n) {
      if (psi(n) == 0.0) continue;
      const Interval& w = sys.windows[static_cast<std::size_t>(n)];
      if (w.hi <= w.lo) continue;
      const double a = sys.a_diag(n);
      const double weight = psi(n) * psi(n);
      auto f = [&](double t) { return weight * std::exp(2.0 * a * (horizon - t)); };
      total += integrate(f, j * sys.period + w.lo, j * sys.period + w.hi, quad).value;
    }
  }
  return total;
}

NullControllabilityWitness noncontrollability_witness(const PeriodicSystem& sys, int m,
                                                      double big_c, bool auto_extend) {
  if (!sys.is_example4()) throw DomainError("witness construction needs the series-switched system");
  if (m < 1) throw DomainError("need at least one period");
  if (!(big_c > 1.0)) throw DomainError("observability constant must exceed 1");
  const double alpha = *sys.alpha_series;
  const double md = m;
  const double bound = md + std::sqrt(md * md + 2.0 * std::log(big_c) + std::log(2.0 / alpha));
  int n = static_cast<int>(std::ceil(bound));
  if (n == bound) ++n;  // the inequality is strict

  NullControllabilityWitness out;
  out.n = n;
  const PeriodicSystem* target = &sys;
  PeriodicSystem grown;
  if (n > sys.modes()) {
    if (!auto_extend) {
      throw DomainError("witness mode " + std::to_string(n) + " exceeds the truncation (" +
                        std::to_string(sys.modes()) + " modes)");
    }
    grown = build_example4(n, std::max(sys.series_terms, n + 2));
    target = &grown;
    out.extended = true;
  }
  Vector e = Vector::Zero(target->modes());
  e(n - 1) = 1.0;
  out.energy = periodic_observation_energy(*target, m, e);
  out.lhs = std::exp(-static_cast<double>(n) * m);
  out.rhs = big_c * std::sqrt(out.energy);
  const double nd = n;
  out.energy_bound = std::exp(-nd * nd) / (alpha * -std::expm1(-2.0 * nd));
  if (!(out.lhs > out.rhs)) {
    throw Error("witness inequality failed at mode " + std::to_string(n));
  }
  return out;
}

double example4_constant(const PeriodicSystem& sys, int k) {
  if (!sys.is_example4()) throw DomainError("constant defined for the series-switched system only");
  if (k < 1) throw DomainError("k must be positive");
  const double kd = k;
  return std::sqrt(*sys.alpha_series) * std::exp(0.5 * kd * kd);
}

PeriodicCertificate periodic_weakobs_check(const PeriodicSystem& sys, int k, int n_k, double c_k,
                                           int samples, std::uint64_t seed) {
  validate(sys);
  if (k < 1 || n_k < 1) throw DomainError("k and n_k must be positive");
  if (!(c_k >= 0.0)) throw DomainError("constant must be nonnegative");
  const double horizon = n_k * sys.period;
  const Vector decay = (sys.a_diag.array() * horizon).exp().matrix();
  const Matrix terminal = decay.cwiseAbs2().asDiagonal();
  const Matrix observation = periodic_mode_energies(sys, n_k).asDiagonal();
  const double eps = std::exp(-static_cast<double>(k) * horizon);

  CheckOptions opts;
  opts.samples = samples;
  opts.seed = seed;
  const InequalityDecision d = decide_inequality(terminal, observation, c_k, eps, opts);

  PeriodicCertificate out;
  out.k = k;
  out.n_k = n_k;
  out.c_k = c_k;
  out.status = d.status;
  out.sufficient_margin = d.sufficient_margin;
  out.best_ratio = d.best_ratio;
  out.margin = d.status == CertStatus::certified ? d.sufficient_margin : c_k - d.best_ratio;
  out.witness = d.witness;
  return out;
}

PeriodicCertificate example4_stabilizability_check(const PeriodicSystem& sys, int k, int samples,
                                                   std::uint64_t seed) {
  if (!sys.is_example4()) throw DomainError("check defined for the series-switched system only");
  if (sys.modes() <= k) {
    throw DomainError("truncation must keep more than k modes");
  }
  const double c = example4_constant(sys, k);
  PeriodicCertificate out = periodic_weakobs_check(sys, k, 1, c, samples, seed);

  const double alpha = *sys.alpha_series;
  const Vector energies = periodic_mode_energies(sys, 1);
  const double kd = k;
  for (Eigen::Index i = 0; i < sys.modes(); ++i) {
    const int n = static_cast<int>(i) + 1;
    const double nd = n;
    ModeMargin mm;
    mm.n = n;
    mm.energy = energies(i);
    mm.energy_lower_bound = std::exp(-nd * nd) / alpha * std::exp(-2.0 * nd);
    mm.key_factor = std::exp(kd * kd - nd * nd);
    // Modes beyond k are covered by the residual term alone.
    mm.key_fact_holds = n > k || mm.key_factor >= 1.0 - 1e-12;
    out.mode_margins.push_back(mm);
  }
  return out;
}

}  // namespace stabcert

#pragma once

#include <optional>
#include <vector>

#include "stabcert/systems.hpp"
#include "stabcert/weakobs.hpp"

namespace stabcert {

/// Which certified inequality a synthesized feedback came from.
struct FeedbackProvenance {
  int k = 0;
  double t_k = 0.0;
  double d_k = 0.0;
  /// Shifted inequality constants for A + mu I: D e^{mu T_k} and
  /// exp(-(k - mu) T_k) < 1.
  double shifted_d = 0.0;
  double shifted_residual = 0.0;
};

struct FeedbackResult {
  double mu = 0.0;
  Matrix riccati_p;
  Matrix gain_k;                ///< K = -B^T P
  double residual = 0.0;        ///< |shifted CARE residual|_F
  double measured_rate = 0.0;   ///< -max Re eig(A + B K)
  double shifted_rate = 0.0;    ///< -max Re eig(A + mu I + B K)
  double measured_overshoot = 0.0;
  std::optional<FeedbackProvenance> provenance;
};

/// Stabilizing solution of (A+mu I)^T P + P (A+mu I) - P B B^T P + I = 0.
/// Throws UnstabilizableError when (A + mu I, B) is not stabilizable.
FeedbackResult solve_shifted_riccati(const LtiSystem& sys, double mu);

/// Checks (A + mu I, B) with the PBH rank test; throws UnstabilizableError.
void require_stabilizable(const LtiSystem& sys, double mu);

struct RateMeasurement {
  double rate = 0.0;
  double overshoot = 0.0;
};

/// rate = -max Re eig(A + B K); overshoot = max_t |exp((A+BK)t)| e^{rate t}
/// on `grid` + 1 equispaced points of [0, horizon].
RateMeasurement closed_loop_rate(const LtiSystem& sys, const Matrix& gain, double horizon,
                                 int grid = 200);

/// Norm of exp((A+BK)t) sampled at each point, for decay-curve output.
std::vector<std::pair<double, double>> decay_curve(const LtiSystem& sys, const Matrix& gain,
                                                   double horizon, int grid);

/// Piecewise control  u(t) = -B^T exp(A^T (len - (t - start))) eta  on each segment.
class ControlSignal {
 public:
  struct Segment {
    double start = 0.0;
    double length = 0.0;
    Vector eta;
    double l2_norm = 0.0;
  };

  ControlSignal(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {}

  void append(Segment seg);
  Vector evaluate(double t) const;
  std::vector<double> breakpoints() const;
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  double l2_norm() const noexcept { return l2_norm_; }
  Eigen::Index inputs() const noexcept { return b_.cols(); }

 private:
  Matrix a_;
  Matrix b_;
  std::vector<Segment> segments_;
  double l2_norm_ = 0.0;
};

struct EpsNullControl {
  ControlSignal control;
  Vector terminal_state;
  double regularization = 0.0;  ///< nu in eta = (G + nu I)^{-1} e^{AT} y0
};

/// Minimum-norm control steering y0 into the ball of radius eps |y0| at T.
EpsNullControl min_norm_eps_null(const LtiSystem& sys, double horizon, double eps,
                                 const Vector& y0);

struct DecayReport {
  std::vector<double> state_norms;       ///< |y(i t_seg)|, i = 0..segments
  std::vector<double> state_bounds;      ///< eps_seg^i |y0|
  std::vector<double> segment_norms;     ///< |u_i|_{L2}
  std::vector<double> segment_ratios;    ///< |u_{i+1}| / |u_i|
  double weighted_norm = 0.0;            ///< |e^{beta t} u|_{L2(0, segments t_seg)}
  double weighted_norm_bound = 0.0;      ///< sum_i e^{beta (i+1) t_seg} |u_i|
  bool contraction_holds = true;
};

struct ConcatenatedControl {
  ControlSignal control;
  DecayReport report;
};

/// Concatenates per-segment eps-null controls. Requires
/// eps_seg <= exp(-2 beta t_seg).
ConcatenatedControl concatenated_control(const LtiSystem& sys, double beta, double t_seg,
                                         double eps_seg, const Vector& y0, int segments);

/// Composes the discrete sequence of a certificate family with the shifted
/// Riccati synthesis: picks k >= k_mu, k_mu - 1 <= mu < k_mu, then solves.
FeedbackResult certificate_to_feedback(const LtiSystem& sys, const CertificateFamily& family,
                                       double mu);

/// Weak observability constants implied by a stabilizing feedback:
/// C = overshoot at rate alpha, D = C |K| / sqrt(2 alpha).
WeakObsCertificate certificate_from_feedback(const LtiSystem& sys, const FeedbackResult& fb,
                                             double alpha, double horizon);

}  // namespace stabcert

#include "stabcert/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <lapacke.h>

#include "stabcert/error.hpp"
#include "stabcert/semigroup.hpp"

namespace stabcert {

namespace {

lapack_logical select_stable(const double* re, const double* /*im*/) { return *re < 0.0; }

struct SchurForm {
  Matrix t;
  Matrix u;
  lapack_int selected = 0;
};

SchurForm real_schur(const Matrix& a, bool order_stable) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  SchurForm out{a, Matrix(a.rows(), a.rows()), 0};
  std::vector<double> wr(static_cast<std::size_t>(n));
  std::vector<double> wi(static_cast<std::size_t>(n));
  const lapack_int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', order_stable ? 'S' : 'N',
                    order_stable ? select_stable : nullptr, n, out.t.data(), n, &out.selected,
                    wr.data(), wi.data(), out.u.data(), n);
  if (info != 0) throw Error("real Schur decomposition failed (dgees info " + std::to_string(info) + ")");
  return out;
}

// Solves F^T X + X F = C for X.
Matrix solve_lyapunov(const Matrix& f, const Matrix& c) {
  const lapack_int n = static_cast<lapack_int>(f.rows());
  const SchurForm s = real_schur(f, false);
  Matrix y = s.u.transpose() * c * s.u;
  double scale = 1.0;
  const lapack_int info = LAPACKE_dtrsyl(LAPACK_COL_MAJOR, 'T', 'N', 1, n, n, s.t.data(), n,
                                         s.t.data(), n, y.data(), n, &scale);
  if (info < 0) throw Error("Sylvester solve failed");
  y /= scale;
  Matrix x = s.u * y * s.u.transpose();
  return 0.5 * (x + x.transpose());
}

Matrix care_residual(const Matrix& as, const Matrix& bbt, const Matrix& p) {
  const Eigen::Index n = as.rows();
  return as.transpose() * p + p * as - p * bbt * p + Matrix::Identity(n, n);
}

double spectral_abscissa(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

double two_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

void require_stabilizable(const LtiSystem& sys, double mu) {
  const Eigen::Index n = sys.states();
  const Eigen::Index m = sys.inputs();
  const Matrix as = sys.a() + mu * Matrix::Identity(n, n);
  Eigen::EigenSolver<Matrix> es(as, false);
  Matrix pencil(n, n + m);
  pencil << as, sys.b();
  const double scale = std::max(1.0, pencil.norm());
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    if (lam.real() < -1e-10) continue;
    Eigen::MatrixXcd pbh = pencil.cast<std::complex<double>>();
    pbh.leftCols(n) -= lam * Eigen::MatrixXcd::Identity(n, n);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(pbh);
    if (svd.singularValues()(n - 1) <= 1e-10 * scale) {
      std::ostringstream os;
      os << "shifted pair (A + " << mu << " I, B) is not stabilizable: eigenvalue " << lam.real()
         << (lam.imag() >= 0 ? "+" : "") << lam.imag() << "i is uncontrollable";
      throw UnstabilizableError(os.str(), lam.real(), lam.imag());
    }
  }
}

FeedbackResult solve_shifted_riccati(const LtiSystem& sys, double mu) {
  if (!(mu > 0.0)) throw DomainError("decay target mu must be positive");
  require_stabilizable(sys, mu);
  const Eigen::Index n = sys.states();
  const Matrix as = sys.a() + mu * Matrix::Identity(n, n);
  const Matrix bbt = sys.b() * sys.b().transpose();

  Matrix ham(2 * n, 2 * n);
  ham << as, -bbt, -Matrix::Identity(n, n), -as.transpose();
  const SchurForm s = real_schur(ham, true);
  if (s.selected != n) {
    throw Error("Hamiltonian has eigenvalues on the imaginary axis; no stabilizing solution");
  }
  const Matrix u11 = s.u.topLeftCorner(n, n);
  const Matrix u21 = s.u.bottomLeftCorner(n, n);
  // P = U21 U11^{-1}  <=>  U11^T P^T = U21^T
  Matrix p = u11.transpose().partialPivLu().solve(u21.transpose()).transpose();
  p = 0.5 * (p + p.transpose()).eval();

  // One Newton (Kleinman) refinement step, kept only if it lowers the residual.
  {
    const Matrix closed = as - bbt * p;
    const Matrix rhs = -(Matrix::Identity(n, n) + p * bbt * p);
    const Matrix refined = solve_lyapunov(closed, rhs);
    if (refined.allFinite() &&
        care_residual(as, bbt, refined).norm() < care_residual(as, bbt, p).norm()) {
      p = refined;
    }
  }

  FeedbackResult out;
  out.mu = mu;
  out.riccati_p = p;
  out.gain_k = -sys.b().transpose() * p;
  out.residual = care_residual(as, bbt, p).norm();
  const Matrix acl = sys.a() + sys.b() * out.gain_k;
  out.measured_rate = -spectral_abscissa(acl);
  out.shifted_rate = -spectral_abscissa(acl + mu * Matrix::Identity(n, n));
  const double horizon = std::clamp(10.0 / std::max(out.measured_rate, 1e-3), 1.0, 100.0);
  out.measured_overshoot = closed_loop_rate(sys, out.gain_k, horizon, 200).overshoot;
  return out;
}

RateMeasurement closed_loop_rate(const LtiSystem& sys, const Matrix& gain, double horizon,
                                 int grid) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  if (grid < 1) throw DomainError("grid must have at least one interval");
  if (gain.rows() != sys.inputs() || gain.cols() != sys.states()) {
    throw DimensionError("gain must be M x N");
  }
  const Matrix acl = sys.a() + sys.b() * gain;
  RateMeasurement out;
  out.rate = -spectral_abscissa(acl);
  // exp(acl t_i) by repeated multiplication with one step exponential.
  const Matrix step = expm(acl, horizon / grid);
  Matrix e = Matrix::Identity(acl.rows(), acl.cols());
  for (int i = 0; i <= grid; ++i) {
    const double t = horizon * i / grid;
    out.overshoot = std::max(out.overshoot, two_norm(e) * std::exp(out.rate * t));
    e = (step * e).eval();
  }
  return out;
}

std::vector<std::pair<double, double>> decay_curve(const LtiSystem& sys, const Matrix& gain,
                                                   double horizon, int grid) {
  if (!(horizon > 0.0) || grid < 1) throw DomainError("decay curve needs a positive grid");
  const Matrix acl = sys.a() + sys.b() * gain;
  std::vector<std::pair<double, double>> out;
  const Matrix step = expm(acl, horizon / grid);
  Matrix e = Matrix::Identity(acl.rows(), acl.cols());
  for (int i = 0; i <= grid; ++i) {
    out.emplace_back(horizon * i / grid, two_norm(e));
    e = (step * e).eval();
  }
  return out;
}

// ---------------------------------------------------------------------------

void ControlSignal::append(Segment seg) {
  if (!segments_.empty()) {
    const Segment& last = segments_.back();
    if (seg.start < last.start + last.length - 1e-12 * std::max(1.0, seg.start)) {
      throw DomainError("control segments must be increasing");
    }
  }
  if (seg.eta.size() != a_.rows()) throw DimensionError("segment coefficient has wrong length");
  l2_norm_ = std::sqrt(l2_norm_ * l2_norm_ + seg.l2_norm * seg.l2_norm);
  segments_.push_back(std::move(seg));
}

Vector ControlSignal::evaluate(double t) const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    const double end = s.start + s.length;
    const bool last = i + 1 == segments_.size();
    if (t >= s.start && (t < end || (last && t <= end))) {
      const double tau = s.length - (t - s.start);
      return -b_.transpose() * (expm(a_.transpose(), tau) * s.eta);
    }
  }
  return Vector::Zero(b_.cols());
}

std::vector<double> ControlSignal::breakpoints() const {
  std::vector<double> out;
  for (const auto& s : segments_) out.push_back(s.start);
  if (!segments_.empty()) out.push_back(segments_.back().start + segments_.back().length);
  return out;
}

EpsNullControl min_norm_eps_null(const LtiSystem& sys, double horizon, double eps,
                                 const Vector& y0) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  if (!(eps >= 0.0)) throw DomainError("eps must be nonnegative");
  if (y0.size() != sys.states()) throw DimensionError("initial state has wrong length");

  const Eigen::Index n = sys.states();
  const Matrix gram = observability_gramian(sys, horizon).matrix;
  const Vector free_end = expm(sys.a(), horizon) * y0;
  const double target = eps * y0.norm();

  EpsNullControl out{ControlSignal(sys.a(), sys.b()), free_end, 0.0};
  if (free_end.norm() <= target) {
    out.control.append({0.0, horizon, Vector::Zero(n), 0.0});
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const Vector lam = es.eigenvalues();
  const Vector w = es.eigenvectors().transpose() * free_end;
  const double floor = 1e-14 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);

  auto terminal_norm = [&](double nu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double denom = std::max(lam(i), 0.0) + nu;
      const double f = (lam(i) <= floor && nu <= 0.0) ? 1.0 : nu / denom;
      s += f * f * w(i) * w(i);
    }
    return std::sqrt(s);
  };

  double nu = 0.0;
  if (terminal_norm(0.0) > target * (1.0 + 1e-12) + 1e-300) {
    if (eps == 0.0) throw SteeringError("exact null control needs a nonsingular Gramian");
    throw SteeringError("terminal ball unreachable: target lies inside the uncontrollable part");
  }
  if (eps > 0.0) {
    double hi = std::max(1.0, lam.maxCoeff());
    while (terminal_norm(hi) < target) hi *= 10.0;
    double lo = 0.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (terminal_norm(mid) <= target ? lo : hi) = mid;
    }
    nu = lo;
  }

  Vector coef(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = std::max(lam(i), 0.0) + nu;
    coef(i) = (denom <= floor) ? 0.0 : w(i) / denom;
  }
  const Vector eta = es.eigenvectors() * coef;
  const double energy = std::max(0.0, eta.dot(gram * eta));
  out.control.append({0.0, horizon, eta, std::sqrt(energy)});
  out.terminal_state = free_end - gram * eta;
  out.regularization = nu;
  return out;
}

ConcatenatedControl concatenated_control(const LtiSystem& sys, double beta, double t_seg,
                                         double eps_seg, const Vector& y0, int segments) {
  if (!(beta > 0.0) || !(t_seg > 0.0)) throw DomainError("beta and t_seg must be positive");
  if (!(eps_seg > 0.0 && eps_seg < 1.0)) throw DomainError("eps_seg must lie in (0, 1)");
  if (eps_seg > std::exp(-2.0 * beta * t_seg) * (1.0 + 1e-12)) {
    throw DomainError("eps_seg must not exceed exp(-2 beta t_seg)");
  }
  if (segments < 1) throw DomainError("need at least one segment");

  ConcatenatedControl out{ControlSignal(sys.a(), sys.b()), {}};
  DecayReport& rep = out.report;
  Vector y = y0;
  const double y0n = y0.norm();
  rep.state_norms.push_back(y0n);
  rep.state_bounds.push_back(y0n);
  QuadratureSpec quad;
  for (int i = 0; i < segments; ++i) {
    EpsNullControl seg = min_norm_eps_null(sys, t_seg, eps_seg, y);
    ControlSignal::Segment s = seg.control.segments().front();
    s.start = i * t_seg;
    const double norm_i = s.l2_norm;
    rep.segment_norms.push_back(norm_i);
    rep.weighted_norm_bound += std::exp(beta * (i + 1) * t_seg) * norm_i;
    // int over the segment of e^{2 beta t} |u(t)|^2
    const Matrix bt = sys.b().transpose();
    const Matrix at = sys.a().transpose();
    auto weighted = [&](double tau) {
      const Vector u = bt * (expm(at, t_seg - tau) * s.eta);
      return std::exp(2.0 * beta * (i * t_seg + tau)) * u.squaredNorm();
    };
    if (norm_i > 0.0) {
      rep.weighted_norm += integrate(weighted, 0.0, t_seg, quad).value;
    }
    out.control.append(std::move(s));
    y = seg.terminal_state;
    rep.state_norms.push_back(y.norm());
    rep.state_bounds.push_back(std::pow(eps_seg, i + 1) * y0n);
  }
  rep.weighted_norm = std::sqrt(rep.weighted_norm);
  for (std::size_t i = 0; i + 1 < rep.segment_norms.size(); ++i) {
    if (rep.segment_norms[i] > 0.0) {
      rep.segment_ratios.push_back(rep.segment_norms[i + 1] / rep.segment_norms[i]);
    }
  }
  for (std::size_t i = 0; i < rep.state_norms.size(); ++i) {
    if (rep.state_norms[i] > rep.state_bounds[i] * (1.0 + 1e-9) + 1e-300) {
      rep.contraction_holds = false;
    }
  }
  return out;
}

FeedbackResult certificate_to_feedback(const LtiSystem& sys, const CertificateFamily& family,
                                       double mu) {
  if (!(mu > 0.0)) throw DomainError("decay target mu must be positive");
  if (family.certificates.empty()) throw DomainError("certificate family is empty");
  int k_max = 0;
  for (double a : family.alphas) k_max = std::max(k_max, static_cast<int>(std::floor(a)) - 1);
  const std::vector<SequenceEntry> seq = discrete_sequence(family, std::max(k_max, 1));
  const int k_mu = static_cast<int>(std::floor(mu)) + 1;
  auto it = std::find_if(seq.begin(), seq.end(), [&](const SequenceEntry& e) { return e.k >= k_mu; });
  if (it == seq.end()) {
    throw DomainError("no certified entry with k >= " + std::to_string(k_mu) + " for mu = " +
                      std::to_string(mu));
  }
  FeedbackProvenance prov;
  prov.k = it->k;
  prov.t_k = it->t_k;
  prov.d_k = it->d_k;
  prov.shifted_d = it->d_k * std::exp(mu * it->t_k);
  prov.shifted_residual = std::exp(-(it->k - mu) * it->t_k);

  FeedbackResult out = solve_shifted_riccati(sys, mu);
  out.provenance = prov;
  return out;
}

WeakObsCertificate certificate_from_feedback(const LtiSystem& sys, const FeedbackResult& fb,
                                             double alpha, double horizon) {
  if (!(alpha > 0.0) || !(horizon > 0.0)) throw DomainError("alpha and horizon must be positive");
  if (!(fb.measured_rate > alpha)) {
    throw DomainError("feedback decay rate does not exceed the requested alpha");
  }
  const Matrix acl = sys.a() + sys.b() * fb.gain_k;
  const double span = std::clamp(40.0 / (fb.measured_rate - alpha), 1.0, 400.0);
  double c = 1.0;
  for (int i = 0; i <= 800; ++i) {
    const double t = span * i / 800.0;
    c = std::max(c, two_norm(expm(acl, t)) * std::exp(alpha * t));
  }
  WeakObsCertificate cert;
  cert.horizon = horizon;
  cert.alpha = alpha;
  cert.c_const = c;
  cert.d_const = c * two_norm(fb.gain_k) / std::sqrt(2.0 * alpha);
  return cert;
}

}  // namespace stabcert

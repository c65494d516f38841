#include "stabcert/semigroup.hpp"

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "stabcert/error.hpp"

namespace stabcert {

namespace {

bool is_diag(const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j && a(i, j) != 0.0) return false;
  return true;
}

void require_horizon(double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive");
}

}  // namespace

Matrix expm(const Matrix& a, double t) {
  if (a.rows() != a.cols()) throw DimensionError("expm needs a square matrix");
  if (is_diag(a)) {
    return (a.diagonal() * t).array().exp().matrix().asDiagonal();
  }
  return Matrix(a * t).exp();
}

Vector propagate(const LtiSystem& sys, double t, const Vector& x, bool adjoint) {
  if (x.size() != sys.states()) throw DimensionError("state vector has wrong length");
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("propagation time must be >= 0");
  if (sys.is_diagonal()) {
    return ((sys.a().diagonal() * t).array().exp() * x.array()).matrix();
  }
  return adjoint ? Vector(expm(sys.a().transpose(), t) * x) : Vector(expm(sys.a(), t) * x);
}

double observation_energy(const LtiSystem& sys, double horizon, const Vector& phi,
                          const QuadratureSpec& quad) {
  require_horizon(horizon);
  if (phi.size() != sys.states()) throw DimensionError("phi has wrong length");
  const Matrix bt = sys.b().transpose();
  auto integrand = [&](double t) -> double {
    return (bt * propagate(sys, t, phi, /*adjoint=*/true)).squaredNorm();
  };
  return integrate(integrand, 0.0, horizon, quad).value;
}

double exp_ratio(double s, double horizon) {
  const double x = s * horizon;
  if (std::abs(x) < 1e-8) {
    return horizon * (1.0 + x / 2.0 + x * x / 6.0);
  }
  return std::expm1(x) / s;
}

GramianResult observability_gramian(const LtiSystem& sys, double horizon,
                                    const QuadratureSpec& quad, GramianMethod method) {
  require_horizon(horizon);
  const Eigen::Index n = sys.states();
  if (method == GramianMethod::closed_form && !sys.is_diagonal()) {
    throw DomainError("closed-form Gramian needs a diagonal system");
  }
  const bool closed = method == GramianMethod::closed_form ||
                      (method == GramianMethod::automatic && sys.is_diagonal());
  GramianResult out;
  out.horizon = horizon;
  if (closed) {
    const Vector lam = sys.a().diagonal();
    const Matrix bbt = sys.b() * sys.b().transpose();
    out.matrix.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) {
        const double v = bbt(i, j) * exp_ratio(lam(i) + lam(j), horizon);
        out.matrix(i, j) = v;
        out.matrix(j, i) = v;
      }
    }
    return out;
  }
  const Matrix& a = sys.a();
  const Matrix& b = sys.b();
  auto integrand = [&](double t) -> Matrix {
    const Matrix eb = expm(a, t) * b;
    return eb * eb.transpose();
  };
  auto res = integrate(integrand, 0.0, horizon, quad);
  out.matrix = 0.5 * (res.value + res.value.transpose());
  out.quadrature_error_estimate = res.error_estimate;
  return out;
}

double tail_ratio(const SpectralSystem& spec, const ProjectionFamily& fam, int k, double t,
                  const Vector& phi) {
  if (phi.size() != spec.modes()) throw DimensionError("phi has wrong length");
  Vector tail = phi;
  for (Eigen::Index i : fam.range(k)) tail(i) = 0.0;
  tail = ((spec.eigenvalues * t).array().exp() * tail.array()).matrix();
  const double num = tail.norm();
  if (num == 0.0) return 0.0;
  const double bound = fam.m_k[static_cast<std::size_t>(k - 1)] *
                       std::exp(-fam.alpha_k[static_cast<std::size_t>(k - 1)] * t) * phi.norm();
  return bound > 0.0 ? num / bound : std::numeric_limits<double>::infinity();
}

TailCheckReport dissipative_tail_check(const SpectralSystem& spec, const ProjectionFamily& fam,
                                       const std::vector<double>& t_grid, int samples,
                                       std::uint64_t seed) {
  const Eigen::Index n = spec.modes();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  TailCheckReport rep;
  rep.worst_ratio_per_k.assign(static_cast<std::size_t>(fam.size()), 0.0);

  std::vector<Vector> phis;
  phis.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    Vector phi(n);
    for (Eigen::Index i = 0; i < n; ++i) phi(i) = normal(rng);
    phis.push_back(std::move(phi));
  }

  for (int k = 1; k <= fam.size(); ++k) {
    std::vector<bool> kept(static_cast<std::size_t>(n), false);
    for (Eigen::Index i : fam.range(k)) kept[static_cast<std::size_t>(i)] = true;
    const double mk = fam.m_k[static_cast<std::size_t>(k - 1)];
    const double ak = fam.alpha_k[static_cast<std::size_t>(k - 1)];
    for (double t : t_grid) {
      for (const Vector& phi : phis) {
        double tail = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (kept[static_cast<std::size_t>(i)]) continue;
          const double v = std::exp(spec.eigenvalues(i) * t) * phi(i);
          tail += v * v;
        }
        tail = std::sqrt(tail);
        double ratio = 0.0;
        if (tail > 0.0) {
          const double bound = mk * std::exp(-ak * t) * phi.norm();
          ratio = bound > 0.0 ? tail / bound : std::numeric_limits<double>::infinity();
        }
        ++rep.evaluations;
        if (ratio > 1.0 + 1e-12) ++rep.violations;
        auto& wk = rep.worst_ratio_per_k[static_cast<std::size_t>(k - 1)];
        wk = std::max(wk, ratio);
        if (ratio > rep.worst_ratio) {
          rep.worst_ratio = ratio;
          rep.worst_k = k;
          rep.worst_t = t;
        }
      }
    }
  }
  return rep;
}

}  // namespace stabcert

#include "stabcert/systems.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "stabcert/error.hpp"
#include "stabcert/quadrature.hpp"

namespace stabcert {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

bool off_diagonal_zero(const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j && a(i, j) != 0.0) return false;
    }
  }
  return true;
}

// int_a^b 2 sin(j pi x) sin(k pi x) dx
double sine_gram(int j, int k, double a, double b) {
  if (j == k) {
    const double w = 2.0 * j * kPi;
    return (b - a) - (std::sin(w * b) - std::sin(w * a)) / w;
  }
  const double dm = (j - k) * kPi;
  const double dp = (j + k) * kPi;
  return (std::sin(dm * b) - std::sin(dm * a)) / dm - (std::sin(dp * b) - std::sin(dp * a)) / dp;
}

void require_intervals(const std::vector<Interval>& set) {
  if (set.empty()) throw DomainError("control set is empty");
  for (const auto& iv : set) {
    if (!(iv.hi > iv.lo)) throw DomainError("control set interval has hi <= lo");
  }
}

}  // namespace

LtiSystem::LtiSystem(Matrix a, Matrix b, std::string label, std::optional<std::string> parent)
    : a_(std::move(a)), b_(std::move(b)), label_(std::move(label)), parent_(std::move(parent)) {
  if (a_.rows() < 1 || a_.rows() != a_.cols()) {
    throw DimensionError("system matrix must be square with N >= 1");
  }
  if (b_.cols() < 1 || b_.rows() != a_.rows()) {
    throw DimensionError("control matrix must have N rows and M >= 1 columns");
  }
  if (!a_.allFinite() || !b_.allFinite()) throw DomainError("system has non-finite entries");
  diagonal_ = off_diagonal_zero(a_);
}

LtiSystem build_system(Matrix a, Matrix b, std::string label) {
  return LtiSystem(std::move(a), std::move(b), std::move(label));
}

LtiSystem truncate(const LtiSystem& sys, Eigen::Index n) {
  if (n < 1 || n > sys.states()) throw DomainError("truncation size out of range");
  return LtiSystem(sys.a().topLeftCorner(n, n), sys.b().topRows(n), sys.label(),
                   sys.parent().value_or(sys.label()));
}

LtiSystem SpectralSystem::to_lti() const {
  return LtiSystem(Matrix(eigenvalues.asDiagonal()), control_rows, basis_label, basis_label);
}

SpectralSystem truncate_modes(const SpectralSystem& spec, Eigen::Index n) {
  if (n < 1 || n > spec.modes()) throw DomainError("truncation size out of range");
  return SpectralSystem{spec.eigenvalues.head(n), spec.control_rows.topRows(n), spec.basis_label};
}

LtiSystem truncate(const SpectralSystem& spec, Eigen::Index n) {
  SpectralSystem head = truncate_modes(spec, n);
  std::string label = spec.basis_label + " [modes 1.." + std::to_string(n) + "]";
  return LtiSystem(Matrix(head.eigenvalues.asDiagonal()), head.control_rows, std::move(label),
                   spec.basis_label);
}

SpectralSystem point_control_heat(double x0, double c, Eigen::Index n) {
  if (!(x0 > 0.0 && x0 < 1.0)) throw DomainError("x0 must lie strictly inside (0, 1)");
  if (n < 1) throw DomainError("need at least one mode");
  SpectralSystem out;
  out.eigenvalues.resize(n);
  out.control_rows.resize(n, 1);
  for (Eigen::Index j = 1; j <= n; ++j) {
    out.eigenvalues(j - 1) = -(j * kPi) * (j * kPi) + c;
    out.control_rows(j - 1, 0) = std::numbers::sqrt2 * std::sin(j * kPi * x0);
  }
  out.basis_label = "point_heat(x0=" + fmt_double(x0) + ", c=" + fmt_double(c) + ")";
  return out;
}

Vector hermite_functions(double x, Eigen::Index n) {
  Vector h(n);
  if (n == 0) return h;
  h(0) = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (n > 1) h(1) = std::numbers::sqrt2 * x * h(0);
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    const double kd = static_cast<double>(k);
    h(k + 1) = std::sqrt(2.0 / (kd + 1.0)) * x * h(k) - std::sqrt(kd / (kd + 1.0)) * h(k - 1);
  }
  return h;
}

SpectralSystem hermite_heat(double c, const std::vector<Interval>& control_set, Eigen::Index n) {
  if (c < 1.0) throw DomainError("hermite_heat requires c >= 1 (space dimension)");
  if (n < 1) throw DomainError("need at least one mode");
  require_intervals(control_set);

  // Beyond |x| = reach every h_k (k < n) is below double precision.
  const double reach = std::sqrt(2.0 * static_cast<double>(n) + 1.0) + 12.0;
  QuadratureSpec quad;
  quad.panels = 16;
  quad.nodes_per_panel = 16;
  quad.rel_tol = 1e-13;

  Matrix gram = Matrix::Zero(n, n);
  auto outer = [n](double x) -> Matrix {
    const Vector h = hermite_functions(x, n);
    return h * h.transpose();
  };
  for (const auto& iv : control_set) {
    const double lo = std::max(iv.lo, -reach);
    const double hi = std::min(iv.hi, reach);
    if (hi <= lo) continue;
    try {
      gram += integrate(outer, lo, hi, quad).value;
    } catch (const QuadratureError& e) {
      throw QuadratureError(std::string("hermite_heat: ") + e.what());
    }
  }
  gram = 0.5 * (gram + gram.transpose()).eval();

  SpectralSystem out;
  out.eigenvalues.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) out.eigenvalues(k) = -(2.0 * k + 1.0) + c;
  out.control_rows = gram;
  out.basis_label = "hermite(c=" + fmt_double(c) + ", dim=1)";
  return out;
}

SpectralSystem fractional_heat(double s, double c, const std::vector<Interval>& control_set,
                               Eigen::Index n) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("fractional order s must lie in (0, 1)");
  if (c < 0.0) throw DomainError("fractional_heat requires c >= 0");
  if (n < 1) throw DomainError("need at least one mode");
  require_intervals(control_set);
  for (const auto& iv : control_set) {
    if (iv.lo < 0.0 || iv.hi > 1.0) throw DomainError("control set must lie inside (0, 1)");
  }

  SpectralSystem out;
  out.eigenvalues.resize(n);
  out.control_rows = Matrix::Zero(n, n);
  for (Eigen::Index j = 1; j <= n; ++j) {
    out.eigenvalues(j - 1) = -std::pow(j * kPi, s) + c;
    for (Eigen::Index k = 1; k <= j; ++k) {
      double v = 0.0;
      for (const auto& iv : control_set) {
        v += sine_gram(static_cast<int>(j), static_cast<int>(k), iv.lo, iv.hi);
      }
      out.control_rows(j - 1, k - 1) = v;
      out.control_rows(k - 1, j - 1) = v;
    }
  }
  out.basis_label = "fractional_dirichlet(s=" + fmt_double(s) + ", c=" + fmt_double(c) + ")";
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// e^x stays an exactly floorable double below 2^53.
constexpr double kExactLogLimit = 36.7;

std::optional<std::uint64_t> checked_affine(std::uint64_t a, std::uint64_t q, std::uint64_t prev) {
  std::uint64_t prod = 0;
  std::uint64_t sum = 0;
  if (__builtin_mul_overflow(a, q, &prod)) return std::nullopt;
  if (__builtin_add_overflow(prod, prev, &sum)) return std::nullopt;
  return sum;
}

double log_add(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

}  // namespace

ContinuedFractionX0 continued_fraction_x0(int depth, double overflow_guard) {
  if (depth < 2) throw DomainError("continued fraction depth must be >= 2");
  const double ninf = -std::numeric_limits<double>::infinity();
  const double exact_limit = std::min(overflow_guard, kExactLogLimit);

  ContinuedFractionX0 cf;
  cf.partial_quotients = {0, 2};
  cf.log_partial_quotients = {ninf, std::log(2.0)};
  cf.q = {0, 1};
  cf.log_q = {ninf, 0.0};

  for (int n = 1; n < depth; ++n) {
    // q_{n+1} = a_n q_n + q_{n-1}
    const auto& an = cf.partial_quotients[n];
    std::optional<std::uint64_t> qn1;
    if (an && cf.q[n] && cf.q[n - 1]) qn1 = checked_affine(*an, *cf.q[n], *cf.q[n - 1]);
    cf.q.push_back(qn1);
    const double log_qn1 =
        qn1 ? std::log(static_cast<double>(*qn1))
            : log_add(cf.log_partial_quotients[n] + cf.log_q[n], cf.log_q[n - 1]);
    cf.log_q.push_back(log_qn1);

    // a_{n+1} = floor(exp(q_{n+1}^3)) + 1
    std::optional<double> cube;
    if (qn1) cube = std::pow(static_cast<double>(*qn1), 3.0);
    if (cube && *cube <= exact_limit) {
      const auto a = static_cast<std::uint64_t>(std::floor(std::exp(*cube))) + 1;
      cf.partial_quotients.push_back(a);
      cf.log_partial_quotients.push_back(std::log(static_cast<double>(a)));
    } else {
      cf.partial_quotients.push_back(std::nullopt);
      cf.log_partial_quotients.push_back(cube ? *cube : std::exp(3.0 * log_qn1));
    }
  }
  // Closing denominator q_{depth+1}.
  {
    const int n = depth;
    const auto& an = cf.partial_quotients[n];
    std::optional<std::uint64_t> qn1;
    if (an && cf.q[n] && cf.q[n - 1]) qn1 = checked_affine(*an, *cf.q[n], *cf.q[n - 1]);
    cf.q.push_back(qn1);
    cf.log_q.push_back(qn1 ? std::log(static_cast<double>(*qn1))
                           : log_add(cf.log_partial_quotients[n] + cf.log_q[n], cf.log_q[n - 1]));
  }

  // Numerators with the same indexing: p_0 = 1, p_1 = a_0, p_{n+1} = a_n p_n + p_{n-1}.
  std::vector<std::optional<std::uint64_t>> p = {1, cf.partial_quotients[0]};
  for (int n = 1; n < static_cast<int>(cf.q.size()) - 1; ++n) {
    const auto& an = cf.partial_quotients[n];
    std::optional<std::uint64_t> pn1;
    if (an && p[n] && p[n - 1]) pn1 = checked_affine(*an, *p[n], *p[n - 1]);
    p.push_back(pn1);
  }
  for (std::size_t n = 1; n < cf.q.size(); ++n) {
    if (!p[n] || !cf.q[n]) break;
    cf.convergents.push_back(Convergent{*p[n], *cf.q[n]});
  }

  // Deepest exact convergent whose successor denominator is known.
  const std::size_t idx = std::min(cf.convergents.size(), cf.q.size() - 2);
  const Convergent& best = cf.convergents[idx - 1];
  cf.value = static_cast<double>(static_cast<long double>(best.p) / best.q);
  cf.value_error_bound = std::exp(-(cf.log_q[idx] + cf.log_q[idx + 1]));
  return cf;
}

void validate(const UnboundedConstantsSpec& spec) {
  if (!(spec.gamma > 0.0 && spec.gamma < 0.5)) throw DomainError("gamma must lie in (0, 1/2)");
  if (!(spec.c_gamma > 0.0)) throw DomainError("C(gamma) must be positive");
  if (!(spec.b_norm >= 0.0)) throw DomainError("b_norm must be nonnegative");
  if (!std::isfinite(spec.rho0)) throw DomainError("rho0 must be finite");
}

}  // namespace stabcert

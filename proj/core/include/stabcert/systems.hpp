#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stabcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Closed interval [lo, hi]; either end may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Finite truncation of a control system y' = A y + B u.
///
/// `a()` is the generator (N x N, units 1/time) and `b()` the control
/// injection (N x M). Construction validates shapes and finiteness; the
/// object is immutable afterwards.
class LtiSystem {
 public:
  LtiSystem(Matrix a, Matrix b, std::string label = {},
            std::optional<std::string> parent = std::nullopt);

  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }
  Eigen::Index states() const noexcept { return a_.rows(); }
  Eigen::Index inputs() const noexcept { return b_.cols(); }
  const std::string& label() const noexcept { return label_; }
  const std::optional<std::string>& parent() const noexcept { return parent_; }

  /// True when every off-diagonal entry of A is exactly zero.
  bool is_diagonal() const noexcept { return diagonal_; }

 private:
  Matrix a_;
  Matrix b_;
  std::string label_;
  std::optional<std::string> parent_;
  bool diagonal_ = false;
};

LtiSystem build_system(Matrix a, Matrix b, std::string label = {});

/// Leading principal truncation of an LtiSystem (first n states, all inputs).
LtiSystem truncate(const LtiSystem& sys, Eigen::Index n);

/// Diagonal system written in an orthonormal eigenbasis.
///
/// Mode n evolves as exp(eigenvalues[n] t). Row n of `control_rows` is the
/// action of B* on the n-th basis function, so the matrix form of B is
/// `control_rows` itself.
struct SpectralSystem {
  Vector eigenvalues;
  Matrix control_rows;
  std::string basis_label;

  Eigen::Index modes() const noexcept { return eigenvalues.size(); }
  LtiSystem to_lti() const;
};

/// Keeps the first n modes of a spectral system.
SpectralSystem truncate_modes(const SpectralSystem& spec, Eigen::Index n);

/// truncate_modes(spec, n).to_lti(), with the truncation recorded in the label.
LtiSystem truncate(const SpectralSystem& spec, Eigen::Index n);

/// Point-controlled 1-D heat equation on (0,1) with Dirichlet ends,
/// y_t = y_xx + c y + delta(x - x0) u, in the basis sqrt(2) sin(j pi x).
SpectralSystem point_control_heat(double x0, double c, Eigen::Index n);

/// Hermite operator heat equation in one space dimension,
/// y_t = y_xx - x^2 y + c y + chi_E u, in the orthonormal Hermite functions.
SpectralSystem hermite_heat(double c, const std::vector<Interval>& control_set, Eigen::Index n);

/// Spectral fractional Dirichlet Laplacian surrogate on (0,1),
/// y_t = -(-Delta)^{s/2} y + c y + chi_E u.
SpectralSystem fractional_heat(double s, double c, const std::vector<Interval>& control_set,
                               Eigen::Index n);

/// Orthonormal Hermite functions h_0..h_{n-1} evaluated at x.
Vector hermite_functions(double x, Eigen::Index n);

// ---------------------------------------------------------------------------
// Continued fraction x0 = [0; 2, a_2, a_3, ...] with a_{n+1} = floor(exp(q_{n+1}^3)) + 1.

struct Convergent {
  std::uint64_t p = 0;
  std::uint64_t q = 1;
};

struct ContinuedFractionX0 {
  /// a_0..a_depth; empty where the integer is not representable.
  std::vector<std::optional<std::uint64_t>> partial_quotients;
  /// ln a_n for every index (exact log for exact terms, q^3 otherwise).
  std::vector<double> log_partial_quotients;
  /// q_0..q_{depth+1}; empty where not exactly representable.
  std::vector<std::optional<std::uint64_t>> q;
  /// ln q_n; entry 0 is -inf because q_0 = 0.
  std::vector<double> log_q;
  /// p_n / q_n for n = 1.. while exact (index n stored at position n - 1).
  std::vector<Convergent> convergents;
  /// Deepest exact convergent as a double and a bound on |x0 - value|.
  double value = 0.0;
  double value_error_bound = 0.0;
};

/// Builds the continued fraction up to a_depth. Partial quotients are kept
/// exact while q^3 stays below both `overflow_guard` and the double-exact
/// integer range; past that only logarithms are tracked. From a_4 on the
/// logarithms themselves exceed the double range and read +inf.
ContinuedFractionX0 continued_fraction_x0(int depth, double overflow_guard = 700.0);

// ---------------------------------------------------------------------------

/// Constants describing an unbounded control operator B in L(U; X_{-gamma}).
struct UnboundedConstantsSpec {
  double gamma = 0.25;
  double rho0 = 0.0;
  double c_gamma = 1.0;  ///< analytic-semigroup constant C(gamma)
  double b_norm = 1.0;   ///< norm of ((rho0 I - A)^gamma)^{-1} B
};

void validate(const UnboundedConstantsSpec& spec);

}  // namespace stabcert

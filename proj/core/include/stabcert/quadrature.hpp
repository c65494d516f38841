#pragma once

#include <cmath>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "stabcert/error.hpp"

namespace stabcert {

/// Composite Gauss-Legendre settings.
struct QuadratureSpec {
  int panels = 32;
  int nodes_per_panel = 8;
  bool adaptive = true;
  double rel_tol = 1e-10;
  int max_depth = 40;
};

void validate(const QuadratureSpec& spec);

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(int n);

template <class T>
struct QuadratureResult {
  T value;
  double error_estimate = 0.0;
  int panels_used = 0;
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }

template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& x) {
  return x.norm();
}

template <class F>
auto apply_rule(const F& f, const GaussLegendreRule& rule, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  using R = std::decay_t<decltype(f(mid))>;
  R sum = rule.weights[0] * f(mid + half * rule.nodes[0]);
  for (std::size_t i = 1; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  sum *= half;
  return sum;
}

}  // namespace detail

/// Integrates f over [a, b] with composite Gauss-Legendre panels.
///
/// f may return double or any Eigen dense type. In adaptive mode every
/// panel is compared against its two halves and bisected until the
/// difference is below rel_tol relative to the running total; the
/// returned error estimate sums the accepted differences. Throws
/// QuadratureError when a panel needs more than max_depth bisections.
template <class F>
auto integrate(const F& f, double a, double b, const QuadratureSpec& spec) {
  validate(spec);
  using R = std::decay_t<decltype(f(a))>;
  const GaussLegendreRule rule = gauss_legendre(spec.nodes_per_panel);
  const double width = (b - a) / spec.panels;

  struct Panel {
    double lo, hi;
    int depth;
    R coarse;
  };

  std::vector<Panel> pending;
  pending.reserve(static_cast<std::size_t>(spec.panels));
  double scale = 0.0;
  for (int i = 0; i < spec.panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == spec.panels) ? b : lo + width;
    R coarse = detail::apply_rule(f, rule, lo, hi);
    scale += detail::magnitude(coarse);
    pending.push_back(Panel{lo, hi, 0, std::move(coarse)});
  }

  QuadratureResult<R> out{pending.front().coarse, 0.0, 0};
  out.value *= 0.0;
  if (!spec.adaptive) {
    for (auto& p : pending) {
      out.value += p.coarse;
      ++out.panels_used;
    }
    return out;
  }

  const double length = b - a;
  while (!pending.empty()) {
    Panel p = std::move(pending.back());
    pending.pop_back();
    const double mid = 0.5 * (p.lo + p.hi);
    R left = detail::apply_rule(f, rule, p.lo, mid);
    R right = detail::apply_rule(f, rule, mid, p.hi);
    R fine = left + right;
    const double err = detail::magnitude(R(fine - p.coarse));
    const double share = (length != 0.0) ? (p.hi - p.lo) / length : 1.0;
    const double allowed =
        spec.rel_tol * std::max(detail::magnitude(fine), scale * share);
    if (err <= allowed || err == 0.0) {
      out.value += fine;
      out.error_estimate += err;
      ++out.panels_used;
      continue;
    }
    if (p.depth >= spec.max_depth) {
      throw QuadratureError("adaptive quadrature exceeded maximum bisection depth");
    }
    pending.push_back(Panel{p.lo, mid, p.depth + 1, std::move(left)});
    pending.push_back(Panel{mid, p.hi, p.depth + 1, std::move(right)});
  }
  return out;
}

}  // namespace stabcert

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "stabcert/systems.hpp"

namespace stabcert {

/// Family of nested coordinate projections P_k in an orthonormal basis,
/// with dissipative data |(I - P_k) S(t)*| <= M_k exp(-alpha_k t).
///
/// Entry i describes k = i + 1. An alpha of +infinity means P_k keeps every
/// mode of the truncation.
struct ProjectionFamily {
  std::vector<std::vector<Eigen::Index>> projections;
  std::vector<double> m_k;
  std::vector<double> alpha_k;
  bool alpha_unbounded = true;
  std::optional<std::vector<double>> c_k;
  std::optional<double> t0;
  std::optional<std::vector<double>> c_k_t0;

  int size() const noexcept { return static_cast<int>(projections.size()); }
  /// Range of P_k (1-based k).
  const std::vector<Eigen::Index>& range(int k) const;
  /// Dense matrix of P_k on an n-dimensional truncation.
  Matrix matrix(int k, Eigen::Index n) const;
};

/// Number of leading modes kept by P_k.
using CutRule = std::function<Eigen::Index(int k)>;

/// m(k) = k.
CutRule first_modes_rule();

/// Keeps the modes with -lambda <= threshold(k); eigenvalues must be sorted
/// descending so the kept set is a prefix.
CutRule eigenvalue_threshold_rule(const SpectralSystem& spec, std::function<double(int)> threshold);

/// Builds P_1..P_{k_max} from a cut rule. M_k = 1 and alpha_k is minus the
/// first discarded eigenvalue.
ProjectionFamily spectral_projection_family(const SpectralSystem& spec, const CutRule& cut_rule,
                                            int k_max);

void validate(const ProjectionFamily& fam);

}  // namespace stabcert

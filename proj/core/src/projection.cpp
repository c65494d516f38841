#include "stabcert/projection.hpp"

#include <limits>

#include "stabcert/error.hpp"

namespace stabcert {

const std::vector<Eigen::Index>& ProjectionFamily::range(int k) const {
  if (k < 1 || k > size()) throw DomainError("projection index k out of range");
  return projections[static_cast<std::size_t>(k - 1)];
}

Matrix ProjectionFamily::matrix(int k, Eigen::Index n) const {
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index i : range(k)) {
    if (i >= n) throw DimensionError("projection range exceeds truncation");
    p(i, i) = 1.0;
  }
  return p;
}

CutRule first_modes_rule() {
  return [](int k) { return static_cast<Eigen::Index>(k); };
}

CutRule eigenvalue_threshold_rule(const SpectralSystem& spec,
                                  std::function<double(int)> threshold) {
  Vector lambdas = spec.eigenvalues;
  return [lambdas, threshold = std::move(threshold)](int k) {
    const double thr = threshold(k);
    Eigen::Index m = 0;
    while (m < lambdas.size() && -lambdas(m) <= thr) ++m;
    return m;
  };
}

ProjectionFamily spectral_projection_family(const SpectralSystem& spec, const CutRule& cut_rule,
                                            int k_max) {
  const Eigen::Index n = spec.modes();
  if (k_max < 1) throw DomainError("projection family needs k_max >= 1");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (spec.eigenvalues(i) > spec.eigenvalues(i - 1)) {
      throw DomainError("eigenvalues must be sorted descending");
    }
  }

  ProjectionFamily fam;
  bool informative = false;
  for (int k = 1; k <= k_max; ++k) {
    const Eigen::Index m = std::clamp<Eigen::Index>(cut_rule(k), 0, n);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
    fam.projections.push_back(std::move(idx));
    fam.m_k.push_back(1.0);
    fam.alpha_k.push_back(m < n ? -spec.eigenvalues(m) : std::numeric_limits<double>::infinity());
    if (m > 0 && m < n) informative = true;
  }
  if (!informative) throw DomainError("cut rule selects zero or all modes for every k");
  validate(fam);
  return fam;
}

void validate(const ProjectionFamily& fam) {
  const std::size_t k = fam.projections.size();
  if (fam.m_k.size() != k || fam.alpha_k.size() != k) {
    throw DimensionError("projection family lists have mismatched lengths");
  }
  for (std::size_t i = 1; i < k; ++i) {
    const auto& prev = fam.projections[i - 1];
    const auto& cur = fam.projections[i];
    if (cur.size() < prev.size() || !std::equal(prev.begin(), prev.end(), cur.begin())) {
      throw DomainError("projections must be nested");
    }
    if (fam.alpha_k[i] < fam.alpha_k[i - 1]) throw DomainError("alpha_k must be nondecreasing");
  }
  for (double m : fam.m_k) {
    if (!(m >= 0.0)) throw DomainError("M_k must be nonnegative");
  }
}

}  // namespace stabcert

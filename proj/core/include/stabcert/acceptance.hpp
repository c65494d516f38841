#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace stabcert {

/// Tolerances of the acceptance suite. Keys for overrides are the member
/// names (e.g. "gramian=1e-14").
struct AcceptanceTolerances {
  double riccati = 1e-10;
  double gramian = 1e-9;
  double rate = 1e-6;
  double closed_form = 1e-9;
  double contraction = 1e-9;
  double segment_ratio = 1e-6;
  double adversarial = 1e-8;  ///< relative slack when re-testing certified verdicts

  /// Throws DomainError on an unknown key.
  void set(const std::string& key, double value);
  std::map<std::string, double> as_map() const;
};

struct AcceptanceOptions {
  AcceptanceTolerances tol{};
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
  bool enforce_runtime = true;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::string detail;
};

CriterionResult acceptance_riccati(const AcceptanceOptions& opts);
CriterionResult acceptance_gramian(const AcceptanceOptions& opts);
CriterionResult acceptance_equivalence(const AcceptanceOptions& opts);
CriterionResult acceptance_lr_constants(const AcceptanceOptions& opts);
CriterionResult acceptance_example4(const AcceptanceOptions& opts);
CriterionResult acceptance_continued_fraction(const AcceptanceOptions& opts);
CriterionResult acceptance_concatenation(const AcceptanceOptions& opts);
CriterionResult acceptance_soundness(const AcceptanceOptions& opts);

/// All eight criteria in order.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// "PASS  3  name  (1.23 s / 30 s)  detail"
std::string format_result(const CriterionResult& r);

}  // namespace stabcert

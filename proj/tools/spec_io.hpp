#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "stabcert/periodic.hpp"
#include "stabcert/systems.hpp"

namespace stabcert::cli {

using Json = nlohmann::ordered_json;

/// Bad input files, malformed JSON or invalid parameters; maps to exit code 3.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedSystem {
  std::string kind;
  Json echo;  ///< the spec as read, with defaults filled in
  std::optional<SpectralSystem> spectral;
  std::optional<LtiSystem> lti;
  std::optional<PeriodicSystem> periodic;
  std::optional<ContinuedFractionX0> continued_fraction;
  std::optional<double> x0;
  std::optional<double> c;
};

/// `arg` is either inline JSON (starts with '{') or a path to a JSON file.
Json read_spec(const std::string& arg);

/// Kinds: matrix, point_heat, hermite, fractional, periodic_l2.
LoadedSystem load_system(const Json& spec);

Matrix matrix_from_json(const Json& j, const char* what);

}  // namespace stabcert::cli

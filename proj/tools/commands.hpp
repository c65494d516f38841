#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stabcert::cli {

/// Everything the front end parsed; unset grids fall back to library defaults.
struct RunConfig {
  std::string command;
  std::string system;
  std::filesystem::path out = "stabcert-out";
  std::uint64_t seed = 12345;
  std::vector<std::string> tol;
  std::vector<double> alpha_grid;
  std::vector<double> t_grid;
  double mu = 1.0;
  unsigned threads = 1;

  // gramian
  double horizon = 1.0;
  std::string method = "auto";
  // weakobs
  std::string statement = "ii";
  double t0 = 0.5;
  double residual_c = 1.0;
  // stabilize
  int grid = 200;
  std::optional<double> decay_horizon;
  // periodic
  int k = 1;
  int n_k = 1;
  std::optional<double> c_k;
  int m = 1;
  std::optional<double> big_c;
  // example
  std::string example;
  std::string x0 = "cf";
  int depth = 3;
  int modes = 0;
  double c = 12.0;
  std::string check = "weakobs";
  bool refute = false;
};

/// Exit codes: 0 certified / success, 1 refuted, 2 inconclusive. Throws
/// InputError for IO and parse problems (exit 3).
int run(const RunConfig& cfg);

}  // namespace stabcert::cli

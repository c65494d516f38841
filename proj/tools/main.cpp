// stabcert: command-line front end for the certificate library.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "commands.hpp"
#include "spec_io.hpp"
#include "stabcert/error.hpp"

namespace {

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("STABCERT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  using stabcert::cli::RunConfig;
  RunConfig cfg;
  cfg.threads = thread_cap();

  CLI::App app{"Weak observability and rapid stabilizability certificates for linear control systems"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--system", cfg.system, "system spec: JSON file or inline JSON");
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--tol", cfg.tol, "tolerance override key=value (repeatable)");
  app.add_option("--alpha-grid", cfg.alpha_grid, "comma-separated alpha grid")->delimiter(',');
  app.add_option("--t-grid", cfg.t_grid, "comma-separated horizon grid")->delimiter(',');
  app.add_option("--mu", cfg.mu, "decay target")->capture_default_str();

  auto* gramian = app.add_subcommand("gramian", "observability Gramian G(T)");
  gramian->add_option("--T", cfg.horizon, "horizon")->capture_default_str();
  gramian->add_option("--method", cfg.method, "auto, closed or quad")->capture_default_str();

  auto* weakobs = app.add_subcommand("weakobs", "sweep weak observability certificates over alpha and T");
  weakobs->add_option("--statement", cfg.statement, "ii (one D per alpha) or iii (D per horizon, T > t0)")
      ->capture_default_str();
  weakobs->add_option("--t0", cfg.t0, "lower horizon bound for iii")->capture_default_str();
  weakobs->add_option("--residual-c", cfg.residual_c, "residual constant C(alpha)")->capture_default_str();

  auto* constants = app.add_subcommand("constants", "explicit certificate constants from spectral data");
  constants->add_option("--t0", cfg.t0, "truncated observability time")->capture_default_str();

  auto* stabilize = app.add_subcommand("stabilize", "shifted Riccati feedback with decay rate > mu");
  stabilize->add_option("--grid", cfg.grid, "decay curve intervals")->capture_default_str();
  stabilize->add_option("--horizon", cfg.decay_horizon, "decay curve horizon");

  auto* periodic = app.add_subcommand("periodic", "periodic weak observability check");
  periodic->add_option("--k", cfg.k, "rate index k")->capture_default_str();
  periodic->add_option("--n-k", cfg.n_k, "number of periods n_k")->capture_default_str();
  periodic->add_option("--c-k", cfg.c_k, "observation constant C(k)");
  periodic->add_option("--m", cfg.m, "periods for the null-controllability witness")->capture_default_str();
  periodic->add_option("--C", cfg.big_c, "observability constant to refute");

  auto* example = app.add_subcommand("example", "worked examples");
  example->require_subcommand(1);
  auto* point_heat = example->add_subcommand("point-heat", "point-controlled heat equation");
  point_heat->add_option("--x0", cfg.x0, "actuator point: number or 'cf'")->capture_default_str();
  point_heat->add_option("--depth", cfg.depth, "continued fraction depth")->capture_default_str();
  point_heat->add_option("--modes", cfg.modes, "truncation size (default 8)");
  point_heat->add_option("--c", cfg.c, "reaction coefficient")->capture_default_str();
  point_heat->add_option("--check", cfg.check, "weakobs, constants or none")->capture_default_str();
  point_heat->add_option("--t0", cfg.t0, "truncated observability time")->capture_default_str();
  auto* periodic_l2 = example->add_subcommand("periodic-l2", "periodic switching example");
  periodic_l2->add_option("--modes", cfg.modes, "truncation size (default 10)");
  periodic_l2->add_flag("--refute-null-controllability", cfg.refute, "build the non-controllability witness");
  periodic_l2->add_option("--m", cfg.m, "periods")->capture_default_str();
  periodic_l2->add_option("--C", cfg.big_c, "observability constant to refute (default 10)");
  periodic_l2->add_option("--k", cfg.k, "rate index for the stabilizability check")->capture_default_str();

  auto* verify = app.add_subcommand("verify-all", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  for (auto* sub : {gramian, weakobs, constants, stabilize, periodic, example, verify}) {
    if (sub->parsed()) cfg.command = sub->get_name();
  }
  if (point_heat->parsed()) cfg.example = "point-heat";
  if (periodic_l2->parsed()) cfg.example = "periodic-l2";

  try {
    return stabcert::cli::run(cfg);
  } catch (const stabcert::cli::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

#include <random>

#include <benchmark/benchmark.h>

#include "stabcert/feedback.hpp"
#include "stabcert/periodic.hpp"
#include "stabcert/semigroup.hpp"
#include "stabcert/weakobs.hpp"

using namespace stabcert;

namespace {

LtiSystem random_system(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  Matrix a(n, n), b(n, m);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = nd(rng);
  return build_system(a, b);
}

void BM_expm(benchmark::State& state) {
  const LtiSystem s = random_system(state.range(0), 1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(expm(s.a(), 1.0));
}
BENCHMARK(BM_expm)->Arg(4)->Arg(16)->Arg(64);

void BM_gramian_quadrature(benchmark::State& state) {
  const LtiSystem s = random_system(state.range(0), 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(observability_gramian(s, 1.0).matrix);
}
BENCHMARK(BM_gramian_quadrature)->Arg(4)->Arg(16)->Arg(32);

void BM_gramian_closed_form(benchmark::State& state) {
  const LtiSystem s = truncate(point_control_heat(0.3, 5.0, state.range(0)), state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(observability_gramian(s, 1.0).matrix);
}
BENCHMARK(BM_gramian_closed_form)->Arg(16)->Arg(64);

void BM_shifted_riccati(benchmark::State& state) {
  const LtiSystem s = random_system(state.range(0), 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_shifted_riccati(s, 2.0).riccati_p);
}
BENCHMARK(BM_shifted_riccati)->Arg(4)->Arg(16)->Arg(64);

void BM_alpha_sweep(benchmark::State& state) {
  const LtiSystem s = random_system(4, 2, 4);
  SweepOptions opts;
  opts.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(sweep_alpha(s, {1, 2, 4}, {0.5, 1, 2}, unit_residual_rule(), opts).verdict);
}
BENCHMARK(BM_alpha_sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_example4_check(benchmark::State& state) {
  const PeriodicSystem p = build_example4(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(example4_stabilizability_check(p, 1).status);
}
BENCHMARK(BM_example4_check)->Arg(10);

}  // namespace

BENCHMARK_MAIN();

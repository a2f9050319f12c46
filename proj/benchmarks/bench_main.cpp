#include <benchmark/benchmark.h>

#include "hybridloc/generator.hpp"
#include "hybridloc/sampling.hpp"
#include "hybridloc/solver.hpp"

namespace {

using namespace hybridloc;

GenResult make_reference(int n, double radius, std::uint64_t seed) {
  GenConfig cfg;
  cfg.n = n;
  cfg.num_anchors = 3;
  cfg.region_side = 7.0;
  cfg.comm_radius = radius;
  cfg.sigma = 0.5;
  cfg.bearing_sigma_deg = 2.0;
  cfg.seed = seed;
  Rng rng(seed);
  return make_instance(cfg, rng);
}

void BM_SolveConvex(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double radius = n <= 10 ? 7.0 : 2.5;
  const GenResult gr = make_reference(n, radius, 1234);
  SolverConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_convex(gr.instance, cfg));
  }
  state.counters["edges"] = static_cast<double>(gr.instance.edges.size());
}
BENCHMARK(BM_SolveConvex)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SolveAlternating(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double radius = n <= 10 ? 7.0 : 2.5;
  const GenResult gr = make_reference(n, radius, 1234);
  SolverConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_alternating(gr.instance, cfg));
  }
}
BENCHMARK(BM_SolveAlternating)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RefineNonconvex(benchmark::State& state) {
  const GenResult gr = make_reference(10, 7.0, 1234);
  SolverConfig cfg;
  const Solution sol = solve_convex(gr.instance, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(refine_nonconvex(sol.x, gr.instance));
  }
}
BENCHMARK(BM_RefineNonconvex)->Unit(benchmark::kMillisecond);

void BM_Localizability(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GenResult gr = make_reference(n, n <= 10 ? 7.0 : 2.5, 99);
  Rng rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_localizability(gr.instance, rng));
  }
}
BENCHMARK(BM_Localizability)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_VmfSample2D(benchmark::State& state) {
  Rng rng(7);
  Eigen::VectorXd mu(2);
  mu << 1, 0;
  const double kappa = kappa_from_bearing_sigma_deg(2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_bearing_vmf(mu, kappa, rng));
  }
}
BENCHMARK(BM_VmfSample2D);

}  // namespace

BENCHMARK_MAIN();

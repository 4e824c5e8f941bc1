// Serial vs OpenMP kernels, plus whole queries per method.
//   ./bench_kernels --benchmark_filter=forward

#include <benchmark/benchmark.h>

#include <vector>

#include "bhpp/baselines.hpp"
#include "bhpp/kernels.hpp"
#include "bhpp/push.hpp"
#include "bhpp/query.hpp"

using namespace bhpp;

namespace {

const BipartiteGraph& graph(std::int64_t edges) {
  static std::vector<std::pair<std::int64_t, BipartiteGraph>> cache;
  for (const auto& [e, g] : cache) {
    if (e == edges) return g;
  }
  const auto side = static_cast<std::size_t>(edges / 20);
  cache.emplace_back(edges, synth_bipartite({side, side, static_cast<std::size_t>(edges), 0.0, 5.0, 0.3}, 1));
  return cache.back().second;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

void BM_forward_step(benchmark::State& state) {
  const auto& g = graph(state.range(0));
  std::vector<double> x(g.u_count(), 1.0 / static_cast<double>(g.u_count())), xv(g.v_count()), y(g.u_count());
  for (auto _ : state) {
    kernels::forward_step(g, x, xv, y, exec_of(state));
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * static_cast<std::int64_t>(g.edge_count()));
}

void BM_backward_sweep(benchmark::State& state) {
  const auto& g = graph(state.range(0));
  std::vector<double> r(g.u_count()), est(g.u_count()), rv(g.v_count());
  for (auto _ : state) {
    state.PauseTiming();
    std::fill(r.begin(), r.end(), 1.0 / static_cast<double>(g.u_count()));
    state.ResumeTiming();
    auto s = kernels::backward_sweep(g, 0.15, r, est, rv, exec_of(state));
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * 2 * static_cast<std::int64_t>(g.edge_count()));
}

void BM_power_iteration(benchmark::State& state) {
  const auto& g = graph(state.range(0));
  std::vector<double> e(g.u_count(), 0.0);
  e[0] = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(power_iteration(g, e, 0.15, 30, exec_of(state)));
}

void BM_query(benchmark::State& state, const char* method, double eps) {
  const auto& g = graph(state.range(0));
  static const IndexMeta meta = build_index_meta(g, 0.15);
  static const AliasTables alias = build_alias(g);
  NodeId q = 0;
  for (auto _ : state) {
    q = static_cast<NodeId>((q + 7919) % g.u_count());
    std::string m = method;
    if (m == "ssbipush") {
      benchmark::DoNotOptimize(bhpp_query(g, meta, q, eps));
    } else if (m == "pisp") {
      benchmark::DoNotOptimize(pisp_query(g, q, 0.15, eps));
    } else {
      benchmark::DoNotOptimize(mcsp_query(g, alias, q, 0.15, eps, 1e-6, q));
    }
  }
}

}  // namespace

BENCHMARK(BM_forward_step)->ArgsProduct({{100'000, 1'000'000}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_backward_sweep)->ArgsProduct({{100'000, 1'000'000}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_power_iteration)->ArgsProduct({{100'000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_query, ssbipush_1e-2, "ssbipush", 1e-2)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_query, pisp_1e-2, "pisp", 1e-2)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_query, mcsp_1e-2, "mcsp", 1e-2)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_query, ssbipush_1e-5, "ssbipush", 1e-5)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_query, pisp_1e-5, "pisp", 1e-5)->Arg(100'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

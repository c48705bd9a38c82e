#include "napmg/solve.hpp"
#include "napmg/stencil.hpp"

#include <benchmark/benchmark.h>

using namespace napmg;

static void BM_Setup(benchmark::State& state) {
    const index_t nx = state.range(0);
    const Topology topo(16, 4);
    const PartitionedMatrix a =
        distribute(laplace2d_5pt(nx, nx), RowPartition::balanced(nx * nx, 16));
    const SetupConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(setup(a, cfg, topo, ModelParams::defaults()));
}
BENCHMARK(BM_Setup)->Arg(16)->Arg(32)->Arg(48);

static void BM_VCycle(benchmark::State& state) {
    const index_t nx = state.range(0);
    const Topology topo(16, 4);
    const RowPartition part = RowPartition::balanced(nx * nx, 16);
    const PartitionedMatrix a = distribute(laplace2d_5pt(nx, nx), part);
    const Hierarchy h = setup(a, SetupConfig{}, topo, ModelParams::defaults());
    const PartitionedVector b =
        PartitionedVector::from_global(Vector(static_cast<std::size_t>(nx * nx), 1.0), part);
    const SolveOptions opts;
    for (auto _ : state) {
        PartitionedVector x = PartitionedVector::zeros(part);
        vcycle(h, 0, x, b, opts);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_VCycle)->Arg(32)->Arg(64);

#include "napmg/comm.hpp"
#include "napmg/model.hpp"
#include "napmg/stencil.hpp"

#include <benchmark/benchmark.h>

using namespace napmg;

namespace {

struct CommFixture {
    Topology topo;
    PartitionedMatrix matrix;
    CommPattern pattern;

    CommFixture(index_t nx, int procs, int ppn)
        : topo(procs, ppn),
          matrix(distribute(laplace2d_5pt(nx, nx), RowPartition::balanced(nx * nx, procs))),
          pattern(comm_pattern(matrix, topo)) {}
};

const CommFixture& fixture() {
    static CommFixture f(64, 64, 8);
    return f;
}

} // namespace

static void BM_BuildSchedule(benchmark::State& state) {
    const auto& f = fixture();
    const Strategy strategy = static_cast<Strategy>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(build_schedule(strategy, f.pattern, f.topo));
}
BENCHMARK(BM_BuildSchedule)->Arg(0)->Arg(1)->Arg(2);

static void BM_ExecuteVector(benchmark::State& state) {
    const auto& f = fixture();
    const Strategy strategy = static_cast<Strategy>(state.range(0));
    const CommSchedule schedule = build_schedule(strategy, f.pattern, f.topo);
    const auto provider = [](int, index_t idx) { return static_cast<double>(idx); };
    for (auto _ : state)
        benchmark::DoNotOptimize(execute_vector(schedule, f.pattern, provider));
}
BENCHMARK(BM_ExecuteVector)->Arg(0)->Arg(1)->Arg(2);

static void BM_EvaluateStrategies(benchmark::State& state) {
    const auto& f = fixture();
    const ModelParams params = ModelParams::defaults();
    for (auto _ : state)
        benchmark::DoNotOptimize(evaluate_vector_strategies(f.pattern, f.topo, params));
}
BENCHMARK(BM_EvaluateStrategies);

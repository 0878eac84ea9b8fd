#include <benchmark/benchmark.h>

#include "smpkit/adjoint.hpp"
#include "smpkit/basis.hpp"
#include "smpkit/lq.hpp"
#include "smpkit/registry.hpp"
#include "smpkit/rng.hpp"

using namespace smpkit;

namespace {

void BM_ForwardImplicit(benchmark::State& state) {
    auto rp = get_problem("lq-scalar");
    const int N = static_cast<int>(state.range(0));
    const int M = 1024;
    auto ctrl = ControlProcess::constant(Vec::Zero(1), N);
    for (auto _ : state) {
        auto paths = simulate(rp.problem, ctrl, TimeGrid(N, 1.0), M, 1,
                              Scheme::SplitStepImplicitDrift);
        benchmark::DoNotOptimize(paths.states.back());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(N) * M);
}

void BM_ForwardExplicit(benchmark::State& state) {
    auto rp = get_problem("lq-scalar");
    const int N = static_cast<int>(state.range(0));
    const int M = 1024;
    auto ctrl = ControlProcess::constant(Vec::Zero(1), N);
    for (auto _ : state) {
        auto paths = simulate(rp.problem, ctrl, TimeGrid(N, 1.0), M, 1, Scheme::ExplicitEuler);
        benchmark::DoNotOptimize(paths.states.back());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(N) * M);
}

void BM_CubicDrift(benchmark::State& state) {
    auto rp = get_problem("poly-cubic");
    const int N = static_cast<int>(state.range(0));
    const int M = 1024;
    auto ctrl = ControlProcess::constant(Vec::Zero(1), N);
    for (auto _ : state) {
        auto paths = simulate(rp.problem, ctrl, TimeGrid(N, 1.0), M, 1,
                              Scheme::SplitStepImplicitDrift);
        benchmark::DoNotOptimize(paths.states.back());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(N) * M);
}

void BM_NodeRegression(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    CounterRng rng(42);
    Mat states(2, M);
    Mat target(1, M);
    for (int m = 0; m < M; ++m) {
        states(0, m) = rng.normal(m, 0, 0);
        states(1, m) = rng.normal(m, 0, 1);
        target(0, m) = states(0, m) * states(0, m) + rng.normal(m, 1, 0);
    }
    RegressionBasis basis{RegressionBasis::Family::Polynomial, 2};
    for (auto _ : state) {
        NodeRegression reg(states, basis, 1e-8 * M);
        benchmark::DoNotOptimize(reg.project(target.row(0)));
    }
    state.SetItemsProcessed(state.iterations() * M);
}

void BM_FirstAdjoint(benchmark::State& state) {
    auto rp = get_problem("lq-scalar");
    const int N = 100, M = static_cast<int>(state.range(0));
    auto ric = riccati_solve(*rp.lq, TimeGrid(N, 1.0));
    auto base = simulate(rp.problem, ric.feedback(), TimeGrid(N, 1.0), M, 1,
                         Scheme::SplitStepImplicitDrift);
    for (auto _ : state) {
        auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
        benchmark::DoNotOptimize(adj.p.front());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(N) * M);
}

void BM_CounterRng(benchmark::State& state) {
    CounterRng rng(7);
    std::uint64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.normal(i, i + 1, 0));
        ++i;
    }
    state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(BM_ForwardImplicit)->Arg(64)->Arg(256);
BENCHMARK(BM_ForwardExplicit)->Arg(64)->Arg(256);
BENCHMARK(BM_CubicDrift)->Arg(64)->Arg(256);
BENCHMARK(BM_NodeRegression)->Arg(1024)->Arg(8192);
BENCHMARK(BM_FirstAdjoint)->Arg(1024)->Arg(4096);
BENCHMARK(BM_CounterRng);

BENCHMARK_MAIN();

#include "apfold/continuation.hpp"
#include "apfold/nonlinear.hpp"
#include "apfold/subsuper.hpp"
#include "apfold/verify.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace apfold;

void BM_Tridiagonal(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const RadialGrid g = build_grid(3, 40.0, n);
    const TridiagonalOperator A = assemble_laplacian(g, FarField::robin_decay);
    const Vector rhs(n, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_tridiagonal(A, rhs));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Tridiagonal)->RangeMultiplier(2)->Range(1000, 16000)->Complexity(benchmark::oN);

void BM_Eigenpair(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const RadialGrid g = build_grid(3, 40.0, n);
    const TridiagonalOperator A = assemble_laplacian(g, FarField::robin_decay);
    const Vector mass =
        assemble_weight_mass(g, [](double r) { return std::pow(1.0 + r * r, -3.0); }, FarField::robin_decay);
    for (auto _ : state) benchmark::DoNotOptimize(first_eigenpair(g, A, mass));
}
BENCHMARK(BM_Eigenpair)->Arg(2000)->Arg(4000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_Newton(benchmark::State& state) {
    const ProblemInstance inst = ProblemInstance::create(canonical_config(static_cast<std::size_t>(state.range(0))));
    const double t = -8.0;
    const NonlinearSystem sys(inst, t);
    const Vector w = build_subsolution(inst, t);
    for (auto _ : state) benchmark::DoNotOptimize(newton_solve(sys, w));
}
BENCHMARK(BM_Newton)->Arg(2000)->Arg(4000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_Branch(benchmark::State& state) {
    const ProblemInstance inst = ProblemInstance::create(canonical_config(static_cast<std::size_t>(state.range(0))));
    const double tau = tau_star(inst).weighted;
    const double t0 = -10.0 * tau;
    const SolutionProfile start = solve_from_subsolution(inst, t0);
    ContinuationOptions co;
    co.t_min = t0 - 1e-9 * (1.0 + std::abs(t0));
    co.t_max = tau + 1.0;
    for (auto _ : state) {
        const Branch b = trace_branch(inst, t0, start.u, co);
        benchmark::DoNotOptimize(detect_fold(inst, b));
    }
}
BENCHMARK(BM_Branch)->Arg(2000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

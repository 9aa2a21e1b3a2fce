#include <benchmark/benchmark.h>

#include "gapest/bounds.hpp"
#include "gapest/oracle.hpp"
#include "gapest/profile.hpp"
#include "gapest/quad.hpp"

using namespace gapest;

namespace {

RadializedCoefficients drift_problem(const char* V) {
    Problem p;
    p.variant = HalfLine{RadialFunction::constant(1.0), RadialFunction::from_text(V)};
    return radialize(p);
}

void BM_CumulativeC(benchmark::State& state) {
    const auto gamma = RadialFunction::from_text("-1-1/(1+r)");
    for (auto _ : state) benchmark::DoNotOptimize(cumulative_C(gamma, 0.0, 60.0));
}
BENCHMARK(BM_CumulativeC)->Unit(benchmark::kMicrosecond);

void BM_NestedIntegral(benchmark::State& state) {
    const auto coeffs = drift_problem("-r-log(1+r)");
    const auto C = cumulative_C(coeffs.gamma, 0.0, 60.0);
    const auto f = RadialFunction::family(Family::Exp, {1.0, 0.5});
    for (auto _ : state) {
        NestedIntegral N(C, f, coeffs.alpha, 0.0);
        benchmark::DoNotOptimize(N.ratio(30.0));
    }
}
BENCHMARK(BM_NestedIntegral)->Unit(benchmark::kMicrosecond);

void BM_TestFunctionSearch(benchmark::State& state) {
    const auto coeffs = drift_problem("-2*r+log(1+r)");
    const auto C = cumulative_C(coeffs.gamma, 0.0, 60.0);
    const int budget = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(search_test_function(C, coeffs.alpha, 0.0, TestFamily{}, budget).value);
}
BENCHMARK(BM_TestFunctionSearch)->Arg(8)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_UpperEq17(benchmark::State& state) {
    const auto coeffs = drift_problem("-2*r+log(1+r)");
    for (auto _ : state) benchmark::DoNotOptimize(upper_eq17(coeffs).value);
}
BENCHMARK(BM_UpperEq17)->Unit(benchmark::kMillisecond);

void BM_OracleLambda1(benchmark::State& state) {
    const auto coeffs = drift_problem("-2*r");
    const auto op = discretize(coeffs, 60.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(lambda1_discrete(op));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_OracleLambda1)->RangeMultiplier(2)->Range(1000, 16000)->Complexity()->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

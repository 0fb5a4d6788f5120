#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cdsm/statistics.hpp"

namespace {

void chiSquaredTailBench(benchmark::State& state) {
    double statistic = 0.01;
    for (auto _ : state) {
        statistic = statistic > 40.0 ? 0.01 : statistic + 0.37;
        benchmark::DoNotOptimize(cdsm::chiSquaredUpperTail(statistic, 1.0));
    }
}
BENCHMARK(chiSquaredTailBench);

void studentTailBench(benchmark::State& state) {
    double t = 0.05;
    for (auto _ : state) {
        t = t > 12.0 ? 0.05 : t + 0.11;
        benchmark::DoNotOptimize(cdsm::studentTwoSidedP(t, 17.3));
    }
}
BENCHMARK(studentTailBench);

void welchBench(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<double> xs(n);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = 3.0 + noise(rng);
        ys[i] = 2.5 + noise(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdsm::welchTTest(xs, ys));
    }
}
BENCHMARK(welchBench)->Arg(10)->Arg(53)->Arg(500);

void classifyBench(benchmark::State& state) {
    cdsm::FrequentPatternStats stats;
    stats.pattern = cdsm::parsePattern("EDIT RUN");
    stats.assignmentId = "A1";
    stats.seqSupportHigh = 21;
    stats.seqSupportLow = 12;
    stats.focHigh = 64;
    stats.focLow = 30;
    std::mt19937_64 rng(6);
    for (int i = 0; i < 26; ++i) {
        stats.instanceSupportsHigh["H" + std::to_string(i)] =
            static_cast<std::int64_t>(rng() % 5);
    }
    for (int i = 0; i < 27; ++i) {
        stats.instanceSupportsLow["L" + std::to_string(i)] =
            static_cast<std::int64_t>(rng() % 4);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdsm::classifyPattern(stats, 26, 27));
    }
}
BENCHMARK(classifyBench);

}  // namespace

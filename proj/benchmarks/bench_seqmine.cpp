#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cdsm/event.hpp"
#include "cdsm/seqmine.hpp"

namespace {

std::vector<cdsm::EventSequence> makeSequences(std::size_t count, std::size_t length,
                                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<cdsm::EventSequence> sequences(count);
    for (std::size_t s = 0; s < count; ++s) {
        sequences[s].subjectId = "S" + std::to_string(s);
        sequences[s].assignmentId = "A1";
        sequences[s].events.reserve(length);
        cdsm::BaseEvent previous = cdsm::BaseEvent::Var;  // avoid a leading duplicate
        for (std::size_t i = 0; i < length; ++i) {
            cdsm::BaseEvent base;
            do {
                base = cdsm::kAllBaseEvents[rng() % cdsm::kBaseEventCount];
            } while (base == previous);  // mimic run-collapsed input
            previous = base;
            sequences[s].events.push_back(cdsm::EventType{base, {}});
        }
        sequences[s].timestamps.resize(length);
    }
    return sequences;
}

void enumerateFrequentBench(benchmark::State& state) {
    const auto sequences =
        makeSequences(static_cast<std::size_t>(state.range(0)),
                      static_cast<std::size_t>(state.range(1)), 99);
    cdsm::MiningParams params;
    params.minPercentileSupport = 0.4;
    params.maxGap = 1;
    params.maxLength = 6;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdsm::enumerateFrequent(sequences, params));
    }
}
BENCHMARK(enumerateFrequentBench)->Args({20, 100})->Args({50, 250})->Args({53, 500})
    ->Unit(benchmark::kMillisecond);

void instanceSupportBench(benchmark::State& state) {
    const auto sequences = makeSequences(1, static_cast<std::size_t>(state.range(0)), 7);
    const cdsm::Pattern pattern = cdsm::parsePattern("EDIT RUN EDIT");
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            cdsm::countInstanceSupport(pattern, sequences[0].events, 2));
    }
}
BENCHMARK(instanceSupportBench)->Arg(100)->Arg(500)->Arg(2000);

void collectStatsBench(benchmark::State& state) {
    const auto high = makeSequences(26, 500, 3);
    const auto low = makeSequences(27, 500, 4);
    cdsm::MiningParams params;
    const auto patterns = cdsm::enumerateFrequent(high, params);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdsm::collectPatternStats(patterns, high, low, params.maxGap));
    }
}
BENCHMARK(collectStatsBench)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#pragma once

// Independent reference implementations the tests check the library
// against. Everything here favors obviousness over speed: recursive
// search and exhaustive enumeration instead of the library's bitset
// machinery, and Boost.Math for tail probabilities.

#include <cstdint>
#include <vector>

#include "cdsm/event.hpp"
#include "cdsm/features.hpp"
#include "cdsm/model.hpp"
#include "cdsm/seqmine.hpp"

namespace oracle {

/// True iff the pattern embeds in the events with every gap <= maxGap.
bool contains(const std::vector<cdsm::EventType>& pattern,
              const std::vector<cdsm::EventType>& events, int maxGap);

/// The lexicographically smallest gap-valid embedding whose indices all
/// lie at or after `start`; empty when there is none.
std::vector<std::size_t> firstEmbedding(const std::vector<cdsm::EventType>& pattern,
                                        const std::vector<cdsm::EventType>& events, int maxGap,
                                        std::size_t start);

/// Leftmost-greedy count of non-overlapping embeddings.
std::int64_t instanceCount(const std::vector<cdsm::EventType>& pattern,
                           const std::vector<cdsm::EventType>& events, int maxGap);

/// Brute force: every pattern over the sequences' alphabet with length in
/// [1, maxLength] contained in at least minCount sequences, sorted.
std::vector<cdsm::Pattern> frequentPatterns(const std::vector<cdsm::EventSequence>& sequences,
                                            std::int64_t minCount, int maxGap, int maxLength);

/// Reference upper-tail probabilities (Boost.Math).
double chiSquaredUpperTailRef(double statistic, double df);
double studentTwoSidedRef(double t, double df);

struct StumpSearch {
    cdsm::Stump stump;  // weight left 0; callers compare the decision fields
    double error = 0.0;
};

/// Exhaustive minimum-weighted-error stump over every (column, threshold,
/// polarity); ties go to the lowest column, then lowest threshold, then
/// positive polarity. Thresholds per column: one below the minimum, then
/// midpoints of consecutive distinct values.
StumpSearch bestStumpExhaustive(const cdsm::FeatureTable& features,
                                const std::vector<cdsm::Label>& labels,
                                const std::vector<double>& weights);

}  // namespace oracle

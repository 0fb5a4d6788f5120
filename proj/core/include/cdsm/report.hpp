#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cdsm/seqmine.hpp"
#include "cdsm/statistics.hpp"

namespace cdsm {

struct PatternReportRow {
    Pattern pattern;
    std::string assignmentId;
    PatternClass cls = PatternClass::Discarded;
    double percHigh = 0.0;             // containment fraction in the high group
    double percLow = 0.0;              // containment fraction in the low group
    double diff = 0.0;                 // |percHigh - percLow|
    double oddsRatio = 0.0;
    bool oddsRatioAtBoundary = false;  // a zero cell forced the estimate
    std::optional<double> chiSquaredP;
    std::optional<double> tTestP;
    /// Indices (into the same report) of longer rows this pattern is a
    /// strict subsequence of, under the same gap constraint.
    std::vector<std::size_t> subsumedBy;
};

/// Builds one row per non-discarded pattern, sorted by diff descending,
/// then by |odds ratio - 1| descending (boundary counts as infinite),
/// then by pattern text ascending.
std::vector<PatternReportRow> buildPatternReport(const std::vector<ClassifiedPattern>& classified,
                                                 std::size_t highCount, std::size_t lowCount,
                                                 int maxGap);

/// Picks ceil(fraction * n) rows from the high-associated rows and the
/// same from the low-associated rows, preserving report order.
std::vector<std::size_t> selectTopFraction(const std::vector<PatternReportRow>& rows,
                                           double fraction);

struct Occurrence {
    std::size_t firstIndex = 0;
    std::size_t lastIndex = 0;
    std::optional<TimeRange> timeRange;  // present when both endpoints have timestamps
};

/// Leftmost-greedy non-overlapping embeddings of the pattern in one
/// sequence, in order of appearance; the same occurrences instance
/// support counts.
std::vector<Occurrence> locateOccurrences(const Pattern& pattern, const EventSequence& sequence,
                                          int maxGap);

/// Fixed-width text rendering of the selected rows, one line per pattern.
std::string renderReportText(const std::vector<PatternReportRow>& rows,
                             const std::vector<std::size_t>& selected);

}  // namespace cdsm

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cdsm/event.hpp"

namespace cdsm {

/// An ordered event-type sequence searched for inside student sequences.
struct Pattern {
    std::vector<EventType> events;

    bool operator==(const Pattern&) const = default;
    auto operator<=>(const Pattern&) const = default;

    std::size_t size() const { return events.size(); }
};

/// Space-separated rendering, e.g. "EDIT-INS CHAN EDIT-INS".
std::string toString(const Pattern& pattern);
Pattern parsePattern(const std::string& text);

struct MiningParams {
    /// Minimum fraction of a group's sequences that must contain a pattern.
    double minPercentileSupport = 0.4;
    /// Maximum number of events skippable between consecutive pattern
    /// elements inside a sequence.
    int maxGap = 1;
    /// Maximum pattern length, in events.
    int maxLength = 6;
};

/// Per-pattern occurrence statistics over the two performance groups.
/// Instance-support vectors carry one entry per sequence in the group,
/// keyed by subject id; focHigh/focLow are their sums.
struct FrequentPatternStats {
    Pattern pattern;
    std::string assignmentId;
    std::int64_t seqSupportHigh = 0;
    std::int64_t seqSupportLow = 0;
    std::int64_t focHigh = 0;
    std::int64_t focLow = 0;
    std::map<std::string, std::int64_t> instanceSupportsHigh;
    std::map<std::string, std::int64_t> instanceSupportsLow;
};

/// True iff `seq` contains an embedding i1 < i2 < ... < ik of `pattern`
/// with seq[ij] == pattern[j] and at most `maxGap` skipped events between
/// consecutive matches.
bool containsPattern(const Pattern& pattern, const std::vector<EventType>& seq, int maxGap);

/// Number of leftmost-greedy, non-overlapping gap-valid embeddings of
/// `pattern` in `seq`: the scan repeatedly takes the lexicographically
/// smallest index embedding starting at or after the previous embedding's
/// last matched index + 1.
std::int64_t countInstanceSupport(const Pattern& pattern, const std::vector<EventType>& seq,
                                  int maxGap);

/// The index embeddings counted by countInstanceSupport, in scan order.
std::vector<std::vector<std::size_t>> findEmbeddings(const Pattern& pattern,
                                                     const std::vector<EventType>& seq,
                                                     int maxGap);

/// Enumerates, via prefix growth with anti-monotone pruning, exactly the
/// patterns of length <= params.maxLength contained (per containsPattern)
/// in at least params.minPercentileSupport of `sequences`. The result is
/// sorted lexicographically. Throws ValidationError when `sequences` is
/// empty.
std::vector<Pattern> enumerateFrequent(const std::vector<EventSequence>& sequences,
                                       const MiningParams& params);

/// Counts sequence support, total occurrences, and per-sequence instance
/// supports for each pattern in both performance groups. `threads` caps
/// worker threads; results are identical to sequential execution.
std::vector<FrequentPatternStats> collectPatternStats(const std::vector<Pattern>& patterns,
                                                      const std::vector<EventSequence>& highSeqs,
                                                      const std::vector<EventSequence>& lowSeqs,
                                                      int maxGap, int threads = 1);

}  // namespace cdsm

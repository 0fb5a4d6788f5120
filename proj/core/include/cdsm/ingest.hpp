#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cdsm/event.hpp"

namespace cdsm {

/// What happened during categorization: how many rows were kept and which
/// event kinds were dropped as unmapped.
struct IngestSummary {
    std::size_t totalEvents = 0;
    std::size_t mappedEvents = 0;
    std::map<std::string, std::size_t> droppedByKind;
    bool timestampsPresent = false;
};

struct CategorizeResult {
    std::vector<EventSequence> sequences;
    IngestSummary summary;
};

/// Parses a delimited ProgSnap2-style event table. The header row must
/// contain at least the subject, assignment, order, and event-type columns
/// named in `config`; all other columns are optional.
///
/// Returns events sorted by (subject, assignment, order). Throws
/// FormatError for missing columns or unparseable cells (with line
/// numbers) and IntegrityError for duplicate order values within a
/// (subject, assignment) group.
std::vector<RawEvent> parseProgSnap2(std::istream& input, const SchemeConfig& config = {});
std::vector<RawEvent> parseProgSnap2(const std::string& text, const SchemeConfig& config = {});

/// Categorizes sorted raw events into one run-collapsed EventSequence per
/// (subject, assignment) pair. Unmapped event kinds are dropped and
/// tallied in the summary. Under the contextual scheme every mapped event
/// except CHAN itself is suffixed with the most recent CHAN's category
/// name; events before the first CHAN stay bare.
CategorizeResult categorize(const std::vector<RawEvent>& events, Scheme scheme);

/// Replaces maximal runs of equal event types with a single instance.
std::vector<EventType> collapseRuns(const std::vector<EventType>& events);

}  // namespace cdsm

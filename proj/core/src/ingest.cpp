#include "cdsm/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <tuple>

#include "cdsm/csv.hpp"
#include "cdsm/errors.hpp"

namespace cdsm {

namespace {

std::int64_t parseInt(const std::string& cell, std::size_t line, const std::string& column) {
    std::int64_t value = 0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw FormatError("line " + std::to_string(line) + ": " + column +
                          " is not an integer: \"" + cell + "\"");
    }
    return value;
}

/// Maps an event kind onto its base category; nullopt marks unmapped
/// kinds, which the categorizer drops.
std::optional<BaseEvent> mapKind(const std::string& kind, const std::string& editSubtype) {
    if (kind == "File.Edit") {
        if (editSubtype == "Insert") return BaseEvent::EditIns;
        if (editSubtype == "Delete") return BaseEvent::EditDel;
        if (editSubtype == "Paste") return BaseEvent::EditPst;
        return BaseEvent::Edit;
    }
    if (kind == "Run.Program") return BaseEvent::Run;
    if (kind.starts_with("File.")) return BaseEvent::File;
    if (kind == "X-ChangeBlockCategory") return BaseEvent::Chan;
    if (kind == "X-AddVariable") return BaseEvent::Var;
    return std::nullopt;
}

}  // namespace

std::vector<RawEvent> parseProgSnap2(const std::string& text, const SchemeConfig& config) {
    const CsvTable table = readCsv(text);

    const auto require = [&](const std::string& name) {
        const std::size_t index = table.findColumn(name);
        if (index == CsvTable::npos) {
            throw FormatError(name + " column absent");
        }
        return index;
    };
    const std::size_t subjectCol = require(config.subjectColumn);
    const std::size_t assignmentCol = require(config.assignmentColumn);
    const std::size_t orderCol = require(config.orderColumn);
    const std::size_t kindCol = require(config.eventTypeColumn);
    const std::size_t timestampCol = table.findColumn(config.timestampColumn);
    const std::size_t editTypeCol = table.findColumn(config.editTypeColumn);
    const std::size_t categoryCol = table.findColumn(config.categoryColumn);
    const std::size_t nodeCountCol = table.findColumn(config.nodeCountColumn);

    std::vector<RawEvent> events;
    events.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::vector<std::string>& row = table.rows[r];
        const std::size_t line = table.rowLines[r];
        RawEvent event;
        event.subjectId = row[subjectCol];
        event.assignmentId = row[assignmentCol];
        event.order = parseInt(row[orderCol], line, config.orderColumn);
        event.eventKind = row[kindCol];
        if (timestampCol != CsvTable::npos && !row[timestampCol].empty()) {
            event.timestampMs = parseInt(row[timestampCol], line, config.timestampColumn);
        }
        if (editTypeCol != CsvTable::npos) event.editSubtype = row[editTypeCol];
        if (categoryCol != CsvTable::npos) event.categoryName = row[categoryCol];
        if (nodeCountCol != CsvTable::npos && !row[nodeCountCol].empty()) {
            event.nodeMetric = parseInt(row[nodeCountCol], line, config.nodeCountColumn);
        }
        events.push_back(std::move(event));
    }

    std::stable_sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
        return std::tie(a.subjectId, a.assignmentId, a.order) <
               std::tie(b.subjectId, b.assignmentId, b.order);
    });
    for (std::size_t i = 1; i < events.size(); ++i) {
        const RawEvent& prev = events[i - 1];
        const RawEvent& cur = events[i];
        if (prev.subjectId == cur.subjectId && prev.assignmentId == cur.assignmentId &&
            prev.order == cur.order) {
            throw IntegrityError("duplicate order " + std::to_string(cur.order) +
                                 " for subject \"" + cur.subjectId + "\" assignment \"" +
                                 cur.assignmentId + "\"");
        }
    }
    return events;
}

std::vector<RawEvent> parseProgSnap2(std::istream& input, const SchemeConfig& config) {
    std::ostringstream buffer;
    buffer << input.rdbuf();
    return parseProgSnap2(buffer.str(), config);
}

std::vector<EventType> collapseRuns(const std::vector<EventType>& events) {
    std::vector<EventType> out;
    out.reserve(events.size());
    for (const EventType& event : events) {
        if (out.empty() || out.back() != event) out.push_back(event);
    }
    return out;
}

namespace {

/// Builds one run-collapsed sequence from a sorted, same-(subject,
/// assignment) slice of raw events, updating the shared summary.
EventSequence buildSequence(const RawEvent* first, const RawEvent* last, Scheme scheme,
                            IngestSummary& summary) {
    EventSequence seq;
    seq.subjectId = first->subjectId;
    seq.assignmentId = first->assignmentId;

    std::string currentCategory;
    for (const RawEvent* event = first; event != last; ++event) {
        ++summary.totalEvents;
        if (event->timestampMs) {
            summary.timestampsPresent = true;
            if (!seq.profile.firstTimestampMs) seq.profile.firstTimestampMs = *event->timestampMs;
            seq.profile.lastTimestampMs = *event->timestampMs;
        }
        if (event->nodeMetric) seq.profile.finalNodeMetric = *event->nodeMetric;

        const std::optional<BaseEvent> base = mapKind(event->eventKind, event->editSubtype);
        if (!base) {
            ++summary.droppedByKind[event->eventKind];
            continue;
        }
        ++summary.mappedEvents;
        ++seq.profile.rawCounts[static_cast<std::size_t>(*base)];

        EventType type{*base, {}};
        if (scheme == Scheme::Contextual && *base != BaseEvent::Chan) {
            type.context = currentCategory;
        }
        if (*base == BaseEvent::Chan) currentCategory = event->categoryName;

        // Collapse on the fly, widening the merged event's time range.
        if (!seq.events.empty() && seq.events.back() == type) {
            if (event->timestampMs) {
                std::optional<TimeRange>& range = seq.timestamps.back();
                if (range) {
                    range->begin = std::min(range->begin, *event->timestampMs);
                    range->end = std::max(range->end, *event->timestampMs);
                } else {
                    range = TimeRange{*event->timestampMs, *event->timestampMs};
                }
            }
            continue;
        }
        seq.events.push_back(std::move(type));
        if (event->timestampMs) {
            seq.timestamps.push_back(TimeRange{*event->timestampMs, *event->timestampMs});
        } else {
            seq.timestamps.push_back(std::nullopt);
        }
    }
    return seq;
}

}  // namespace

CategorizeResult categorize(const std::vector<RawEvent>& events, Scheme scheme) {
    CategorizeResult result;
    std::size_t begin = 0;
    while (begin < events.size()) {
        std::size_t end = begin + 1;
        while (end < events.size() && events[end].subjectId == events[begin].subjectId &&
               events[end].assignmentId == events[begin].assignmentId) {
            ++end;
        }
        result.sequences.push_back(
            buildSequence(&events[begin], events.data() + end, scheme, result.summary));
        begin = end;
    }
    return result;
}

}  // namespace cdsm

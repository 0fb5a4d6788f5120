#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cdsm {

/// Base categories events are collapsed into. EDIT covers generic edits;
/// insert/delete/paste edits are kept as distinct categories.
enum class BaseEvent : std::uint8_t {
    Edit = 0,
    EditIns,
    EditDel,
    EditPst,
    Run,
    File,
    Chan,
    Var,
};

inline constexpr std::size_t kBaseEventCount = 8;

inline constexpr std::array<BaseEvent, kBaseEventCount> kAllBaseEvents = {
    BaseEvent::Edit, BaseEvent::EditIns, BaseEvent::EditDel, BaseEvent::EditPst,
    BaseEvent::Run,  BaseEvent::File,    BaseEvent::Chan,    BaseEvent::Var,
};

std::string toString(BaseEvent base);

/// A categorized event: base category plus, under the contextual scheme,
/// the name of the block category that was open when the event happened.
/// An empty context means "no suffix".
struct EventType {
    BaseEvent base = BaseEvent::Edit;
    std::string context;

    bool operator==(const EventType&) const = default;
    auto operator<=>(const EventType&) const = default;
};

/// Renders e.g. "EDIT-INS" or "EDIT-INS-pen".
std::string toString(const EventType& type);

/// Inverse of toString. Throws FormatError on unknown base categories.
EventType parseEventType(const std::string& text);

enum class Scheme : std::uint8_t {
    General,
    Contextual,
};

std::string toString(Scheme scheme);
Scheme parseScheme(const std::string& text);

/// One row of a ProgSnap2-style event table, prior to categorization.
struct RawEvent {
    std::string subjectId;
    std::string assignmentId;
    std::int64_t order = 0;
    std::optional<std::int64_t> timestampMs;
    std::string eventKind;
    std::string editSubtype;   // empty when absent
    std::string categoryName;  // empty when absent
    std::optional<std::int64_t> nodeMetric;
};

/// Maps the input table's column names onto the fields of RawEvent.
/// Defaults follow the ProgSnap2 main-table conventions; only the first
/// four columns are required to be present in the input.
struct SchemeConfig {
    std::string subjectColumn = "SubjectID";
    std::string assignmentColumn = "AssignmentID";
    std::string orderColumn = "Order";
    std::string eventTypeColumn = "EventType";
    std::string timestampColumn = "ClientTimestamp";
    std::string editTypeColumn = "EditType";
    std::string categoryColumn = "CategoryName";
    std::string nodeCountColumn = "NodeCount";
};

/// Millisecond timestamp range covered by one collapsed event.
struct TimeRange {
    std::int64_t begin = 0;
    std::int64_t end = 0;

    bool operator==(const TimeRange&) const = default;
};

/// Pre-collapse per-(subject, assignment) aggregates consumed by the
/// expert-rule baseline. Counts are over raw categorized events, before
/// run collapsing.
struct ActivityProfile {
    std::array<std::int64_t, kBaseEventCount> rawCounts{};
    std::optional<std::int64_t> firstTimestampMs;
    std::optional<std::int64_t> lastTimestampMs;
    std::optional<std::int64_t> finalNodeMetric;

    std::int64_t rawCount(BaseEvent base) const {
        return rawCounts[static_cast<std::size_t>(base)];
    }
};

/// Ordered, run-collapsed events for one (subject, assignment) pair.
/// `timestamps` parallels `events`; an entry is absent when the raw rows
/// backing that collapsed event carried no timestamp.
struct EventSequence {
    std::string subjectId;
    std::string assignmentId;
    std::vector<EventType> events;
    std::vector<std::optional<TimeRange>> timestamps;
    ActivityProfile profile;
};

}  // namespace cdsm

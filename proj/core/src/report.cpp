#include "cdsm/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "cdsm/errors.hpp"

namespace cdsm {

namespace {

/// Ranking distance of the odds ratio from 1; boundary ratios (0 or inf)
/// rank above every finite one.
double oddsDistance(const PatternReportRow& row) {
    if (row.oddsRatioAtBoundary || std::isinf(row.oddsRatio)) {
        return std::numeric_limits<double>::infinity();
    }
    return std::fabs(row.oddsRatio - 1.0);
}

}  // namespace

std::vector<PatternReportRow> buildPatternReport(const std::vector<ClassifiedPattern>& classified,
                                                 std::size_t highCount, std::size_t lowCount,
                                                 int maxGap) {
    if (highCount == 0 || lowCount == 0) {
        throw ValidationError("buildPatternReport: empty performance group");
    }
    std::vector<PatternReportRow> rows;
    for (const ClassifiedPattern& entry : classified) {
        if (entry.classification.label == PatternClass::Discarded) continue;
        PatternReportRow row;
        row.pattern = entry.stats.pattern;
        row.assignmentId = entry.stats.assignmentId;
        row.cls = entry.classification.label;
        row.percHigh =
            static_cast<double>(entry.stats.seqSupportHigh) / static_cast<double>(highCount);
        row.percLow =
            static_cast<double>(entry.stats.seqSupportLow) / static_cast<double>(lowCount);
        row.diff = std::fabs(row.percHigh - row.percLow);
        const OddsRatioResult ratio = oddsRatio(row.percHigh, row.percLow);
        row.oddsRatio = ratio.value;
        row.oddsRatioAtBoundary = ratio.atBoundary;
        if (entry.classification.containmentTest) {
            row.chiSquaredP = entry.classification.containmentTest->pValue;
        }
        if (entry.classification.occurrenceTest) {
            row.tTestP = entry.classification.occurrenceTest->pValue;
        }
        rows.push_back(std::move(row));
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const PatternReportRow& a, const PatternReportRow& b) {
                         if (a.diff != b.diff) return a.diff > b.diff;
                         const double da = oddsDistance(a);
                         const double db = oddsDistance(b);
                         if (da != db) return da > db;
                         if (a.assignmentId != b.assignmentId) {
                             return a.assignmentId < b.assignmentId;
                         }
                         return toString(a.pattern) < toString(b.pattern);
                     });

    // Flag strict subsequence relationships under the same gap constraint,
    // within the same assignment.
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (i == j) continue;
            if (rows[i].assignmentId != rows[j].assignmentId) continue;
            if (rows[i].pattern.size() >= rows[j].pattern.size()) continue;
            if (containsPattern(rows[i].pattern, rows[j].pattern.events, maxGap)) {
                rows[i].subsumedBy.push_back(j);
            }
        }
    }
    return rows;
}

std::vector<std::size_t> selectTopFraction(const std::vector<PatternReportRow>& rows,
                                           double fraction) {
    if (fraction <= 0.0 || fraction > 1.0) {
        throw ValidationError("selectTopFraction: fraction must be in (0, 1]");
    }
    std::vector<std::size_t> highRows;
    std::vector<std::size_t> lowRows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (isHighAssociated(rows[i].cls)) highRows.push_back(i);
        if (isLowAssociated(rows[i].cls)) lowRows.push_back(i);
    }
    const auto take = [fraction](const std::vector<std::size_t>& indices) {
        const std::size_t count = static_cast<std::size_t>(
            std::ceil(fraction * static_cast<double>(indices.size()) - 1e-12));
        return std::vector<std::size_t>(indices.begin(),
                                        indices.begin() + static_cast<std::ptrdiff_t>(
                                                              std::min(count, indices.size())));
    };
    std::vector<std::size_t> selected = take(highRows);
    const std::vector<std::size_t> lowSelected = take(lowRows);
    selected.insert(selected.end(), lowSelected.begin(), lowSelected.end());
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::vector<Occurrence> locateOccurrences(const Pattern& pattern, const EventSequence& sequence,
                                          int maxGap) {
    std::vector<Occurrence> occurrences;
    for (const std::vector<std::size_t>& embedding :
         findEmbeddings(pattern, sequence.events, maxGap)) {
        Occurrence occurrence;
        occurrence.firstIndex = embedding.front();
        occurrence.lastIndex = embedding.back();
        const auto& first = sequence.timestamps[occurrence.firstIndex];
        const auto& last = sequence.timestamps[occurrence.lastIndex];
        if (first && last) {
            occurrence.timeRange = TimeRange{first->begin, last->end};
        }
        occurrences.push_back(occurrence);
    }
    return occurrences;
}

namespace {

std::string formatPercent(double fraction) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(1);
    out << fraction * 100.0 << '%';
    return out.str();
}

std::string formatOddsRatio(const PatternReportRow& row) {
    if (std::isinf(row.oddsRatio)) return "inf";
    if (row.oddsRatio == 0.0) return "0";
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << row.oddsRatio;
    return out.str();
}

std::string formatP(const std::optional<double>& p) {
    if (!p) return "-";
    std::ostringstream out;
    out.setf(std::ios::scientific);
    out.precision(2);
    out << *p;
    return out.str();
}

}  // namespace

std::string renderReportText(const std::vector<PatternReportRow>& rows,
                             const std::vector<std::size_t>& selected) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Assignment", "Class", "PercHigh", "PercLow", "Diff", "OR", "p(chi2)",
                     "p(t)", "Pattern"});
    for (std::size_t index : selected) {
        const PatternReportRow& row = rows.at(index);
        cells.push_back({row.assignmentId, toString(row.cls), formatPercent(row.percHigh),
                         formatPercent(row.percLow), formatPercent(row.diff), formatOddsRatio(row),
                         formatP(row.chiSquaredP), formatP(row.tTestP), toString(row.pattern)});
    }
    std::vector<std::size_t> widths(cells.front().size(), 0);
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
    }
    std::string out;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c > 0) out += "  ";
            out += line[c];
            if (c + 1 < line.size()) out.append(widths[c] - line[c].size(), ' ');
        }
        out += '\n';
    }
    return out;
}

}  // namespace cdsm

#include "cdsm/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "cdsm/errors.hpp"

namespace cdsm {

std::optional<std::size_t> FeatureTable::findColumn(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return i;
    }
    return std::nullopt;
}

std::string patternColumnName(const std::string& assignmentId, const Pattern& pattern,
                              PatternClass cls) {
    return assignmentId + ":" + toString(pattern) + ":" + toString(cls);
}

namespace {

void fillColumns(const FeatureTable& table, const std::vector<EventSequence>& sequences,
                 int maxGap, std::size_t begin, std::size_t end,
                 std::vector<std::vector<double>>& values) {
    // (subject, assignment) -> sequence lookup.
    std::map<std::pair<std::string, std::string>, const EventSequence*> bySubject;
    for (const EventSequence& seq : sequences) {
        bySubject[{seq.subjectId, seq.assignmentId}] = &seq;
    }
    for (std::size_t c = begin; c < end; ++c) {
        const FeatureColumn& column = table.columns[c];
        for (std::size_t r = 0; r < table.subjects.size(); ++r) {
            const auto it = bySubject.find({table.subjects[r], column.assignmentId});
            if (it == bySubject.end()) continue;
            values[r][c] = static_cast<double>(
                countInstanceSupport(*column.pattern, it->second->events, maxGap));
        }
    }
}

}  // namespace

FeatureTable buildFeatureTable(const std::vector<ClassifiedPattern>& classified,
                               const std::vector<EventSequence>& sequences,
                               const std::vector<std::string>& subjects, int maxGap,
                               int threads) {
    FeatureTable table;
    table.subjects = subjects;
    for (const ClassifiedPattern& entry : classified) {
        if (entry.classification.label == PatternClass::Discarded) continue;
        FeatureColumn column;
        column.assignmentId = entry.stats.assignmentId;
        column.pattern = entry.stats.pattern;
        column.cls = entry.classification.label;
        column.name = patternColumnName(column.assignmentId, *column.pattern, column.cls);
        table.columns.push_back(std::move(column));
    }
    table.values.assign(subjects.size(), std::vector<double>(table.columns.size(), 0.0));

    const std::size_t workers = std::max<std::size_t>(
        1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)),
                                 table.columns.size()));
    if (workers <= 1) {
        fillColumns(table, sequences, maxGap, 0, table.columns.size(), table.values);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (table.columns.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(table.columns.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(fillColumns, std::cref(table), std::cref(sequences), maxGap, begin,
                              end, std::ref(table.values));
        }
        for (std::thread& t : pool) t.join();
    }
    return table;
}

double interpolatedQuantile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("interpolatedQuantile: empty values");
    if (q < 0.0 || q > 1.0) throw ValidationError("interpolatedQuantile: q must be in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

Discretizer fitDiscretizer(const FeatureTable& table) {
    if (table.subjects.empty()) throw ValidationError("fitDiscretizer: empty table");
    Discretizer discretizer;
    discretizer.perColumn.reserve(table.columns.size());
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        std::vector<double> column(table.subjects.size());
        for (std::size_t r = 0; r < table.subjects.size(); ++r) column[r] = table.values[r][c];
        Discretizer::ColumnCuts cuts;
        const PatternClass cls = table.columns[c].cls;
        if (cls == PatternClass::DH || cls == PatternClass::DL) {
            cuts.cuts = {interpolatedQuantile(column, 1.0 / 3.0),
                         interpolatedQuantile(column, 2.0 / 3.0)};
        } else {
            cuts.cuts = {interpolatedQuantile(column, 0.5)};
        }
        discretizer.perColumn.push_back(std::move(cuts));
    }
    return discretizer;
}

FeatureTable applyDiscretizer(const Discretizer& discretizer, const FeatureTable& table) {
    if (discretizer.perColumn.size() != table.columns.size()) {
        throw ValidationError("applyDiscretizer: discretizer fitted on a different column set");
    }
    FeatureTable out = table;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        const std::vector<double>& cuts = discretizer.perColumn[c].cuts;
        for (std::size_t r = 0; r < table.subjects.size(); ++r) {
            const double value = table.values[r][c];
            double code = static_cast<double>(cuts.size());
            for (std::size_t k = 0; k < cuts.size(); ++k) {
                if (value < cuts[k]) {
                    code = static_cast<double>(k);
                    break;
                }
            }
            out.values[r][c] = code;
        }
    }
    return out;
}

FeatureTable discretize(const FeatureTable& table) {
    return applyDiscretizer(fitDiscretizer(table), table);
}

FeatureTable stackTables(const std::vector<FeatureTable>& tables) {
    FeatureTable out;
    std::set<std::string> subjectSet;
    std::set<std::string> columnNames;
    for (const FeatureTable& table : tables) {
        subjectSet.insert(table.subjects.begin(), table.subjects.end());
        for (const FeatureColumn& column : table.columns) {
            if (!columnNames.insert(column.name).second) {
                throw IntegrityError("stackTables: duplicate column \"" + column.name + "\"");
            }
        }
    }
    out.subjects.assign(subjectSet.begin(), subjectSet.end());
    std::map<std::string, std::size_t> rowIndex;
    for (std::size_t r = 0; r < out.subjects.size(); ++r) rowIndex[out.subjects[r]] = r;

    std::size_t totalColumns = 0;
    for (const FeatureTable& table : tables) totalColumns += table.columns.size();
    out.values.assign(out.subjects.size(), std::vector<double>(totalColumns, 0.0));

    std::size_t offset = 0;
    for (const FeatureTable& table : tables) {
        out.columns.insert(out.columns.end(), table.columns.begin(), table.columns.end());
        for (std::size_t r = 0; r < table.subjects.size(); ++r) {
            const std::size_t row = rowIndex[table.subjects[r]];
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                out.values[row][offset + c] = table.values[r][c];
            }
        }
        offset += table.columns.size();
    }
    return out;
}

}  // namespace cdsm

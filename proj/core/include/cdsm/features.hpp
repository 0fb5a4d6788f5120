#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdsm/statistics.hpp"

namespace cdsm {

/// Identity of one feature-table column. Pattern columns carry the mined
/// pattern and its class; expert-baseline columns carry only a name.
struct FeatureColumn {
    std::string name;  // "assignment:pattern:class" for pattern columns
    std::string assignmentId;
    std::optional<Pattern> pattern;
    PatternClass cls = PatternClass::Discarded;
};

/// Students-by-columns value matrix. Values are raw occurrence counts
/// until discretize/applyDiscretizer maps them to {0,1} (FH/FL columns)
/// or {0,1,2} (DH/DL columns).
struct FeatureTable {
    std::vector<std::string> subjects;
    std::vector<FeatureColumn> columns;
    std::vector<std::vector<double>> values;  // [subject][column]

    std::size_t rowCount() const { return subjects.size(); }
    std::size_t columnCount() const { return columns.size(); }
    std::optional<std::size_t> findColumn(const std::string& name) const;
};

std::string patternColumnName(const std::string& assignmentId, const Pattern& pattern,
                              PatternClass cls);

/// One column per non-Discarded classified pattern, one row per subject in
/// `subjects`; the cell is countInstanceSupport of the pattern in that
/// subject's sequence for the pattern's assignment, 0 when the subject has
/// no such sequence.
FeatureTable buildFeatureTable(const std::vector<ClassifiedPattern>& classified,
                               const std::vector<EventSequence>& sequences,
                               const std::vector<std::string>& subjects, int maxGap,
                               int threads = 1);

/// Per-column bin thresholds: the median for 2-bin (FH/FL) columns, the
/// 1/3 and 2/3 quantiles for 3-bin (DH/DL) columns. Quantiles use
/// inclusive linear interpolation over the column's sorted values.
struct Discretizer {
    struct ColumnCuts {
        std::vector<double> cuts;  // size 1 (median) or 2 (terciles)
    };
    std::vector<ColumnCuts> perColumn;
};

Discretizer fitDiscretizer(const FeatureTable& table);

/// Maps each cell to its bin: value < cut0 -> 0, else next bin. The
/// discretizer must have been fit on a table with the same columns.
FeatureTable applyDiscretizer(const Discretizer& discretizer, const FeatureTable& table);

/// fitDiscretizer + applyDiscretizer on the same table.
FeatureTable discretize(const FeatureTable& table);

/// Concatenates columns across tables; the row set is the sorted union of
/// subjects and missing cells are filled with 0. Throws IntegrityError on
/// duplicate column names.
FeatureTable stackTables(const std::vector<FeatureTable>& tables);

/// Linear-interpolation quantile over sorted values (q in [0, 1]).
double interpolatedQuantile(std::vector<double> values, double q);

}  // namespace cdsm

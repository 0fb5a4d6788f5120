#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "cdsm/errors.hpp"
#include "cdsm/features.hpp"
#include "oracle.hpp"

using namespace cdsm;

namespace {

Pattern pat(std::initializer_list<BaseEvent> bases) {
    Pattern pattern;
    for (BaseEvent base : bases) pattern.events.push_back(EventType{base, {}});
    return pattern;
}

ClassifiedPattern classified(const std::string& assignment, const Pattern& pattern,
                             PatternClass cls) {
    ClassifiedPattern entry;
    entry.stats.pattern = pattern;
    entry.stats.assignmentId = assignment;
    entry.classification.label = cls;
    return entry;
}

EventSequence sequence(const std::string& subject, const std::string& assignment,
                       std::initializer_list<BaseEvent> bases) {
    EventSequence seq;
    seq.subjectId = subject;
    seq.assignmentId = assignment;
    for (BaseEvent base : bases) seq.events.push_back(EventType{base, {}});
    seq.timestamps.resize(seq.events.size());
    return seq;
}

/// A single-column table of the given class holding one value per row.
FeatureTable column(PatternClass cls, const std::vector<double>& values) {
    FeatureTable table;
    FeatureColumn col;
    col.name = "col";
    col.cls = cls;
    table.columns.push_back(col);
    for (std::size_t i = 0; i < values.size(); ++i) {
        table.subjects.push_back("S" + std::to_string(i + 1));
        table.values.push_back({values[i]});
    }
    return table;
}

std::vector<double> columnValues(const FeatureTable& table, std::size_t c) {
    std::vector<double> out;
    out.reserve(table.rowCount());
    for (const auto& row : table.values) out.push_back(row[c]);
    return out;
}

}  // namespace

TEST_SUITE("features") {
    TEST_CASE("interpolated quantile uses inclusive linear interpolation") {
        const std::vector<double> values = {0, 1, 2, 3, 4, 5};
        CHECK(interpolatedQuantile(values, 0.0) == 0.0);
        CHECK(interpolatedQuantile(values, 1.0) == 5.0);
        CHECK(interpolatedQuantile(values, 0.5) == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(interpolatedQuantile(values, 1.0 / 3.0) ==
              doctest::Approx(1.6666666666666665).epsilon(1e-12));
        CHECK(interpolatedQuantile(values, 2.0 / 3.0) ==
              doctest::Approx(3.333333333333333).epsilon(1e-12));
        CHECK(interpolatedQuantile({0, 1, 2, 3}, 0.5) == doctest::Approx(1.5).epsilon(1e-12));
        // Order must not matter.
        CHECK(interpolatedQuantile({3, 0, 2, 1}, 0.5) == doctest::Approx(1.5).epsilon(1e-12));
        CHECK_THROWS_AS(interpolatedQuantile({}, 0.5), ValidationError);
        CHECK_THROWS_AS(interpolatedQuantile({1.0}, 1.5), ValidationError);
    }

    TEST_CASE("pattern column names compose assignment, text, and class") {
        CHECK(patternColumnName("A2", pat({BaseEvent::EditIns, BaseEvent::Run}),
                                PatternClass::FH) == "A2:EDIT-INS RUN:FH");
    }

    TEST_CASE("feature table holds instance supports, zero when absent") {
        const std::vector<ClassifiedPattern> patterns = {
            classified("A1", pat({BaseEvent::EditIns, BaseEvent::Run}), PatternClass::FH),
            classified("A1", pat({BaseEvent::Var}), PatternClass::DL),
            classified("A2", pat({BaseEvent::Run}), PatternClass::FL),
            classified("A1", pat({BaseEvent::File}), PatternClass::Discarded),
        };
        const std::vector<EventSequence> sequences = {
            sequence("S1", "A1",
                     {BaseEvent::EditIns, BaseEvent::Run, BaseEvent::EditIns, BaseEvent::File,
                      BaseEvent::Run}),
            sequence("S1", "A2", {BaseEvent::Run, BaseEvent::Run}),
            sequence("S2", "A1", {BaseEvent::Var, BaseEvent::Var, BaseEvent::EditIns}),
        };
        const FeatureTable table =
            buildFeatureTable(patterns, sequences, {"S1", "S2", "S3"}, 1);

        // Discarded patterns contribute no column.
        REQUIRE(table.columnCount() == 3);
        CHECK(table.columns[0].name == "A1:EDIT-INS RUN:FH");
        CHECK(table.columns[1].name == "A1:VAR:DL");
        CHECK(table.columns[2].name == "A2:RUN:FL");
        REQUIRE(table.rowCount() == 3);

        // S1/A1 contains EDIT-INS RUN twice (greedy, gap 1) and no VAR;
        // S1/A2 = [RUN, RUN] holds two instances of [RUN].
        CHECK(table.values[0] == std::vector<double>{2, 0, 2});
        // S2 has no A2 sequence: that cell stays 0.
        CHECK(table.values[1] == std::vector<double>{0, 2, 0});
        // S3 has no sequences at all.
        CHECK(table.values[2] == std::vector<double>{0, 0, 0});

        // Cross-check every cell against the reference counter.
        for (std::size_t r = 0; r < table.rowCount(); ++r) {
            for (std::size_t c = 0; c < table.columnCount(); ++c) {
                std::int64_t expected = 0;
                for (const EventSequence& seq : sequences) {
                    if (seq.subjectId == table.subjects[r] &&
                        seq.assignmentId == table.columns[c].assignmentId) {
                        expected =
                            oracle::instanceCount(table.columns[c].pattern->events, seq.events, 1);
                    }
                }
                CHECK(table.values[r][c] == static_cast<double>(expected));
            }
        }

        // Thread count must not change anything.
        const FeatureTable threaded =
            buildFeatureTable(patterns, sequences, {"S1", "S2", "S3"}, 1, 3);
        CHECK(threaded.values == table.values);
    }

    TEST_CASE("two-bin discretization: below the median becomes 0") {
        const FeatureTable table = discretize(column(PatternClass::FH, {0, 1, 2, 3}));
        CHECK(columnValues(table, 0) == std::vector<double>{0, 0, 1, 1});
    }

    TEST_CASE("three-bin discretization uses terciles") {
        const FeatureTable table = discretize(column(PatternClass::DH, {0, 1, 2, 3, 4, 5}));
        CHECK(columnValues(table, 0) == std::vector<double>{0, 0, 1, 1, 2, 2});
    }

    TEST_CASE("constant columns map to the top code") {
        CHECK(columnValues(discretize(column(PatternClass::FH, {2, 2, 2})), 0) ==
              std::vector<double>{1, 1, 1});
        CHECK(columnValues(discretize(column(PatternClass::DL, {2, 2, 2})), 0) ==
              std::vector<double>{2, 2, 2});
    }

    TEST_CASE("discretization is monotone and in range on random columns") {
        std::mt19937 rng(99);
        for (int trial = 0; trial < 200; ++trial) {
            const PatternClass cls = trial % 2 == 0 ? PatternClass::FL : PatternClass::DH;
            const std::size_t n = 2 + rng() % 40;
            std::vector<double> raw(n);
            for (double& v : raw) v = static_cast<double>(rng() % 20);
            const FeatureTable table = discretize(column(cls, raw));
            const std::vector<double> codes = columnValues(table, 0);
            const double maxCode = cls == PatternClass::DH ? 2.0 : 1.0;
            const double median = interpolatedQuantile(raw, 0.5);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(codes[i] >= 0.0);
                CHECK(codes[i] <= maxCode);
                if (cls == PatternClass::FL) {
                    CHECK(codes[i] == (raw[i] < median ? 0.0 : 1.0));
                }
                for (std::size_t j = 0; j < n; ++j) {
                    if (raw[i] < raw[j]) CHECK(codes[i] <= codes[j]);
                }
            }
        }
    }

    TEST_CASE("discretizer fitted on train applies to unseen values") {
        const FeatureTable train = column(PatternClass::FH, {0, 1, 2, 3});
        const Discretizer discretizer = fitDiscretizer(train);
        FeatureTable test = column(PatternClass::FH, {-5, 1.49, 1.5, 99});
        const FeatureTable coded = applyDiscretizer(discretizer, test);
        CHECK(columnValues(coded, 0) == std::vector<double>{0, 0, 1, 1});

        FeatureTable wrongShape = column(PatternClass::FH, {0, 1});
        wrongShape.columns.push_back(wrongShape.columns[0]);
        wrongShape.columns.back().name = "other";
        wrongShape.values[0].push_back(0);
        wrongShape.values[1].push_back(1);
        CHECK_THROWS_AS(applyDiscretizer(discretizer, wrongShape), ValidationError);
    }

    TEST_CASE("stacking concatenates columns over the subject union") {
        FeatureTable a = column(PatternClass::FH, {1, 2});  // S1, S2
        a.columns[0].name = "A1:X:FH";
        FeatureTable b = column(PatternClass::DL, {7, 8});
        b.columns[0].name = "A2:Y:DL";
        b.subjects = {"S2", "S3"};

        const FeatureTable stacked = stackTables({a, b});
        CHECK(stacked.subjects == std::vector<std::string>{"S1", "S2", "S3"});
        REQUIRE(stacked.columnCount() == 2);
        CHECK(stacked.columns[0].name == "A1:X:FH");
        CHECK(stacked.columns[1].name == "A2:Y:DL");
        CHECK(stacked.values[0] == std::vector<double>{1, 0});  // S1: no A2 row
        CHECK(stacked.values[1] == std::vector<double>{2, 7});
        CHECK(stacked.values[2] == std::vector<double>{0, 8});  // S3: no A1 row

        CHECK_THROWS_AS(stackTables({a, a}), IntegrityError);
    }

    TEST_CASE("findColumn locates by name") {
        const FeatureTable table = column(PatternClass::FH, {1});
        CHECK(table.findColumn("col") == 0);
        CHECK_FALSE(table.findColumn("missing").has_value());
    }
}

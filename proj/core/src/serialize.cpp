#include "cdsm/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cdsm/csv.hpp"
#include "cdsm/errors.hpp"

#include <json.hpp>

namespace cdsm {

namespace {

using nlohmann::json;

json profileToJson(const ActivityProfile& profile) {
    json counts = json::object();
    for (BaseEvent base : kAllBaseEvents) {
        counts[toString(base)] = profile.rawCount(base);
    }
    json out = {{"raw_counts", counts}};
    out["first_timestamp_ms"] =
        profile.firstTimestampMs ? json(*profile.firstTimestampMs) : json(nullptr);
    out["last_timestamp_ms"] =
        profile.lastTimestampMs ? json(*profile.lastTimestampMs) : json(nullptr);
    out["final_node_metric"] =
        profile.finalNodeMetric ? json(*profile.finalNodeMetric) : json(nullptr);
    return out;
}

ActivityProfile profileFromJson(const json& in) {
    ActivityProfile profile;
    const json& counts = in.at("raw_counts");
    for (BaseEvent base : kAllBaseEvents) {
        profile.rawCounts[static_cast<std::size_t>(base)] =
            counts.value(toString(base), std::int64_t{0});
    }
    if (!in.at("first_timestamp_ms").is_null()) {
        profile.firstTimestampMs = in.at("first_timestamp_ms").get<std::int64_t>();
    }
    if (!in.at("last_timestamp_ms").is_null()) {
        profile.lastTimestampMs = in.at("last_timestamp_ms").get<std::int64_t>();
    }
    if (!in.at("final_node_metric").is_null()) {
        profile.finalNodeMetric = in.at("final_node_metric").get<std::int64_t>();
    }
    return profile;
}

json testResultToJson(const std::optional<TestResult>& test) {
    if (!test) return nullptr;
    return json{{"statistic", test->statistic},
                {"df", test->degreesOfFreedom},
                {"p_value", test->pValue}};
}

std::optional<TestResult> testResultFromJson(const json& in) {
    if (in.is_null()) return std::nullopt;
    return TestResult{in.at("statistic").get<double>(), in.at("df").get<double>(),
                      in.at("p_value").get<double>()};
}

json patternToJsonEvents(const Pattern& pattern) {
    json events = json::array();
    for (const EventType& event : pattern.events) events.push_back(toString(event));
    return events;
}

Pattern patternFromJsonEvents(const json& events) {
    Pattern pattern;
    for (const json& event : events) {
        pattern.events.push_back(parseEventType(event.get<std::string>()));
    }
    return pattern;
}

}  // namespace

std::string sequencesToJsonl(const std::vector<EventSequence>& sequences) {
    std::string out;
    for (const EventSequence& seq : sequences) {
        json events = json::array();
        for (const EventType& event : seq.events) events.push_back(toString(event));
        json timestamps = json::array();
        for (const auto& range : seq.timestamps) {
            if (range) {
                timestamps.push_back(json::array({range->begin, range->end}));
            } else {
                timestamps.push_back(nullptr);
            }
        }
        const json line = {{"subject", seq.subjectId},
                           {"assignment", seq.assignmentId},
                           {"events", events},
                           {"timestamps", timestamps},
                           {"profile", profileToJson(seq.profile)}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<EventSequence> sequencesFromJsonl(const std::string& text) {
    std::vector<EventSequence> sequences;
    std::istringstream in(text);
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        try {
            const json parsed = json::parse(line);
            EventSequence seq;
            seq.subjectId = parsed.at("subject").get<std::string>();
            seq.assignmentId = parsed.at("assignment").get<std::string>();
            for (const json& event : parsed.at("events")) {
                seq.events.push_back(parseEventType(event.get<std::string>()));
            }
            for (const json& range : parsed.at("timestamps")) {
                if (range.is_null()) {
                    seq.timestamps.push_back(std::nullopt);
                } else {
                    seq.timestamps.push_back(
                        TimeRange{range.at(0).get<std::int64_t>(),
                                  range.at(1).get<std::int64_t>()});
                }
            }
            if (seq.timestamps.size() != seq.events.size()) {
                throw FormatError("timestamps and events differ in length");
            }
            seq.profile = profileFromJson(parsed.at("profile"));
            sequences.push_back(std::move(seq));
        } catch (const json::exception& e) {
            throw FormatError("line " + std::to_string(lineNo) + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError("line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return sequences;
}

std::vector<EventSequence> sequencesFromJsonl(std::istream& in) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return sequencesFromJsonl(buffer.str());
}

std::string patternsToJson(const std::vector<ClassifiedPattern>& patterns, std::size_t highCount,
                           std::size_t lowCount, int maxGap) {
    json list = json::array();
    for (const ClassifiedPattern& entry : patterns) {
        json supports = json::object();
        for (const auto& [subject, count] : entry.stats.instanceSupportsHigh) {
            supports["high"][subject] = count;
        }
        for (const auto& [subject, count] : entry.stats.instanceSupportsLow) {
            supports["low"][subject] = count;
        }
        if (!supports.contains("high")) supports["high"] = json::object();
        if (!supports.contains("low")) supports["low"] = json::object();
        list.push_back({{"assignment", entry.stats.assignmentId},
                        {"events", patternToJsonEvents(entry.stats.pattern)},
                        {"class", toString(entry.classification.label)},
                        {"seq_support_high", entry.stats.seqSupportHigh},
                        {"seq_support_low", entry.stats.seqSupportLow},
                        {"foc_high", entry.stats.focHigh},
                        {"foc_low", entry.stats.focLow},
                        {"containment_test",
                         testResultToJson(entry.classification.containmentTest)},
                        {"occurrence_test", testResultToJson(entry.classification.occurrenceTest)},
                        {"instance_supports", supports}});
    }
    const json doc = {{"group_sizes", {{"high", highCount}, {"low", lowCount}}},
                      {"max_gap", maxGap},
                      {"patterns", list}};
    return doc.dump(2) + "\n";
}

PatternsFile patternsFromJson(const std::string& text) {
    PatternsFile file;
    try {
        const json doc = json::parse(text);
        file.highCount = doc.at("group_sizes").at("high").get<std::size_t>();
        file.lowCount = doc.at("group_sizes").at("low").get<std::size_t>();
        file.maxGap = doc.at("max_gap").get<int>();
        for (const json& entry : doc.at("patterns")) {
            ClassifiedPattern pattern;
            pattern.stats.assignmentId = entry.at("assignment").get<std::string>();
            pattern.stats.pattern = patternFromJsonEvents(entry.at("events"));
            pattern.stats.seqSupportHigh = entry.at("seq_support_high").get<std::int64_t>();
            pattern.stats.seqSupportLow = entry.at("seq_support_low").get<std::int64_t>();
            pattern.stats.focHigh = entry.at("foc_high").get<std::int64_t>();
            pattern.stats.focLow = entry.at("foc_low").get<std::int64_t>();
            for (const auto& [subject, count] :
                 entry.at("instance_supports").at("high").items()) {
                pattern.stats.instanceSupportsHigh[subject] = count.get<std::int64_t>();
            }
            for (const auto& [subject, count] : entry.at("instance_supports").at("low").items()) {
                pattern.stats.instanceSupportsLow[subject] = count.get<std::int64_t>();
            }
            pattern.classification.label = parsePatternClass(entry.at("class").get<std::string>());
            pattern.classification.containmentTest =
                testResultFromJson(entry.at("containment_test"));
            pattern.classification.occurrenceTest =
                testResultFromJson(entry.at("occurrence_test"));
            file.patterns.push_back(std::move(pattern));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("patterns file: ") + e.what());
    }
    return file;
}

namespace {

std::string formatCell(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.10g", value);
    return buffer;
}

}  // namespace

std::string featuresToCsv(const FeatureTable& table) {
    std::string out;
    std::vector<std::string> header = {"SubjectID"};
    for (const FeatureColumn& column : table.columns) header.push_back(column.name);
    writeCsvRow(out, header);
    for (std::size_t r = 0; r < table.subjects.size(); ++r) {
        std::vector<std::string> row = {table.subjects[r]};
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            row.push_back(formatCell(table.values[r][c]));
        }
        writeCsvRow(out, row);
    }
    return out;
}

namespace {

/// Reconstructs column identity from an "assignment:pattern:class" name;
/// names not of that shape stay plain named columns.
FeatureColumn columnFromName(const std::string& name) {
    FeatureColumn column;
    column.name = name;
    const std::size_t lastColon = name.rfind(':');
    if (lastColon == std::string::npos) return column;
    try {
        const PatternClass cls = parsePatternClass(name.substr(lastColon + 1));
        const std::string rest = name.substr(0, lastColon);
        const std::size_t split = rest.rfind(':');
        if (split == std::string::npos) return column;
        column.cls = cls;
        column.assignmentId = rest.substr(0, split);
        column.pattern = parsePattern(rest.substr(split + 1));
    } catch (const FormatError&) {
        column = FeatureColumn{};
        column.name = name;
    }
    return column;
}

}  // namespace

FeatureTable featuresFromCsv(const std::string& text) {
    const CsvTable csv = readCsv(text);
    if (csv.header.empty() || csv.header.front() != "SubjectID") {
        throw FormatError("features file: first column must be SubjectID");
    }
    FeatureTable table;
    for (std::size_t c = 1; c < csv.header.size(); ++c) {
        table.columns.push_back(columnFromName(csv.header[c]));
    }
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        table.subjects.push_back(csv.rows[r][0]);
        std::vector<double> values;
        values.reserve(table.columns.size());
        for (std::size_t c = 1; c < csv.header.size(); ++c) {
            try {
                values.push_back(std::stod(csv.rows[r][c]));
            } catch (const std::exception&) {
                throw FormatError("line " + std::to_string(csv.rowLines[r]) +
                                  ": not a number: \"" + csv.rows[r][c] + "\"");
            }
        }
        table.values.push_back(std::move(values));
    }
    return table;
}

std::string modelToJson(const TrainedModel& model) {
    json cuts = json::array();
    for (const auto& column : model.discretizer.perColumn) {
        cuts.push_back(column.cuts);
    }
    json rounds = json::array();
    for (const Stump& stump : model.stumps.rounds) {
        rounds.push_back({{"column", stump.column},
                          {"threshold", stump.threshold},
                          {"polarity", stump.polarity},
                          {"weight", stump.weight}});
    }
    const json doc = {{"columns", model.stumps.columnNames},
                      {"discretizer_cuts", cuts},
                      {"rounds", rounds}};
    return doc.dump(2) + "\n";
}

TrainedModel modelFromJson(const std::string& text) {
    TrainedModel model;
    try {
        const json doc = json::parse(text);
        model.stumps.columnNames = doc.at("columns").get<std::vector<std::string>>();
        for (const json& cuts : doc.at("discretizer_cuts")) {
            model.discretizer.perColumn.push_back(
                Discretizer::ColumnCuts{cuts.get<std::vector<double>>()});
        }
        for (const json& entry : doc.at("rounds")) {
            model.stumps.rounds.push_back(Stump{entry.at("column").get<std::size_t>(),
                                                entry.at("threshold").get<double>(),
                                                entry.at("polarity").get<int>(),
                                                entry.at("weight").get<double>()});
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
    return model;
}

namespace {

json metricsToJson(const Metrics& metrics) {
    return json{{"accuracy", metrics.accuracy},
                {"precision", metrics.precision},
                {"recall", metrics.recall}};
}

}  // namespace

std::string evaluationToJson(const EvaluationResult& result) {
    json folds = json::array();
    for (const auto& fold : result.folds.folds) folds.push_back(fold);
    json rotations = json::array();
    for (const RotationResult& rotation : result.rotations) {
        json predicted = json::array();
        for (Label label : rotation.predicted) predicted.push_back(toString(label));
        json actual = json::array();
        for (Label label : rotation.actual) actual.push_back(toString(label));
        rotations.push_back({{"test_fold", rotation.testFold},
                             {"discard_fold", rotation.discardFold},
                             {"test_subjects", rotation.testSubjects},
                             {"predicted", predicted},
                             {"actual", actual},
                             {"metrics", metricsToJson(rotation.metrics)}});
    }
    const json doc = {{"seed", result.seed},
                      {"folds", folds},
                      {"rotations", rotations},
                      {"aggregate", metricsToJson(result.aggregate)}};
    return doc.dump(2) + "\n";
}

std::string reportToJson(const std::vector<PatternReportRow>& rows,
                         const std::vector<std::size_t>& selected, std::size_t highCount,
                         std::size_t lowCount, double topFraction) {
    const std::set<std::size_t> selectedSet(selected.begin(), selected.end());
    json rowsJson = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const PatternReportRow& row = rows[i];
        json entry = {
            {"assignment", row.assignmentId},
            {"pattern", toString(row.pattern)},
            {"class", toString(row.cls)},
            {"perc_high", row.percHigh},
            {"perc_low", row.percLow},
            {"diff", row.diff},
            {"selected", selectedSet.contains(i)},
            {"subsumed_by", row.subsumedBy},
        };
        // JSON has no infinity; boundary ratios go out as the string "inf".
        if (std::isinf(row.oddsRatio)) {
            entry["odds_ratio"] = "inf";
        } else {
            entry["odds_ratio"] = row.oddsRatio;
        }
        entry["odds_ratio_at_boundary"] = row.oddsRatioAtBoundary;
        entry["p_chi_squared"] = row.chiSquaredP ? json(*row.chiSquaredP) : json(nullptr);
        entry["p_t_test"] = row.tTestP ? json(*row.tTestP) : json(nullptr);
        rowsJson.push_back(std::move(entry));
    }
    const json doc = {{"group_sizes", {{"high", highCount}, {"low", lowCount}}},
                      {"top_fraction", topFraction},
                      {"rows", rowsJson}};
    return doc.dump(2) + "\n";
}

std::map<std::string, std::map<std::string, double>> gradesFromCsv(const std::string& text) {
    const CsvTable csv = readCsv(text);
    if (csv.header.empty() || csv.header.front() != "SubjectID") {
        throw FormatError("labels file: first column must be SubjectID");
    }
    std::map<std::string, std::map<std::string, double>> grades;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const std::string& subject = csv.rows[r][0];
        if (grades.contains(subject)) {
            throw IntegrityError("labels file: duplicate subject \"" + subject + "\"");
        }
        std::map<std::string, double>& row = grades[subject];
        for (std::size_t c = 1; c < csv.header.size(); ++c) {
            if (csv.rows[r][c].empty()) continue;
            try {
                row[csv.header[c]] = std::stod(csv.rows[r][c]);
            } catch (const std::exception&) {
                throw FormatError("line " + std::to_string(csv.rowLines[r]) +
                                  ": grade is not a number: \"" + csv.rows[r][c] + "\"");
            }
        }
    }
    return grades;
}

std::string readTextFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open \"" + path + "\" for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("read failure on \"" + path + "\"");
    return buffer.str();
}

void writeTextFile(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open \"" + path + "\" for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failure on \"" + path + "\"");
}

}  // namespace cdsm

#include "cdsm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "cdsm/csv.hpp"
#include "cdsm/errors.hpp"
#include "cdsm/features.hpp"
#include "cdsm/ingest.hpp"
#include "cdsm/report.hpp"
#include "cdsm/serialize.hpp"

namespace cdsm {

std::map<std::string, double> finalGrades(
    const std::map<std::string, std::map<std::string, double>>& gradesBySubject) {
    std::map<std::string, double> finals;
    for (const auto& [subject, grades] : gradesBySubject) {
        if (grades.empty()) continue;
        double sum = 0.0;
        for (const auto& [assignment, grade] : grades) sum += grade;
        finals[subject] = sum / static_cast<double>(grades.size());
    }
    return finals;
}

std::vector<ClassifiedPattern> mineAndClassify(const std::vector<EventSequence>& highSeqs,
                                               const std::vector<EventSequence>& lowSeqs,
                                               const MiningParams& params,
                                               const ClassifyOptions& options, int threads) {
    if (highSeqs.empty() || lowSeqs.empty()) {
        throw ValidationError("mineAndClassify: both performance groups need sequences");
    }
    std::vector<Pattern> fromHigh = enumerateFrequent(highSeqs, params);
    std::vector<Pattern> fromLow = enumerateFrequent(lowSeqs, params);

    std::vector<Pattern> merged;
    merged.reserve(fromHigh.size() + fromLow.size());
    std::merge(fromHigh.begin(), fromHigh.end(), fromLow.begin(), fromLow.end(),
               std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    const std::vector<FrequentPatternStats> stats =
        collectPatternStats(merged, highSeqs, lowSeqs, params.maxGap, threads);

    std::vector<ClassifiedPattern> classified;
    classified.reserve(stats.size());
    for (const FrequentPatternStats& entry : stats) {
        ClassifiedPattern pattern;
        pattern.stats = entry;
        pattern.classification =
            classifyPattern(entry, static_cast<std::int64_t>(highSeqs.size()),
                            static_cast<std::int64_t>(lowSeqs.size()), options);
        classified.push_back(std::move(pattern));
    }
    return classified;
}

namespace {

/// Sequences of one assignment restricted to a subject set, split by label.
struct GroupedSequences {
    std::vector<EventSequence> high;
    std::vector<EventSequence> low;
};

GroupedSequences groupSequences(const std::vector<EventSequence>& sequences,
                                const std::string& assignment,
                                const std::map<std::string, Label>& labels) {
    GroupedSequences grouped;
    for (const EventSequence& seq : sequences) {
        if (seq.assignmentId != assignment) continue;
        const auto label = labels.find(seq.subjectId);
        if (label == labels.end()) continue;
        (label->second == Label::High ? grouped.high : grouped.low).push_back(seq);
    }
    return grouped;
}

std::vector<EventSequence> sequencesForSubjects(const std::vector<EventSequence>& sequences,
                                                const std::set<std::string>& subjects,
                                                const std::set<std::string>& assignments) {
    std::vector<EventSequence> out;
    for (const EventSequence& seq : sequences) {
        if (subjects.contains(seq.subjectId) && assignments.contains(seq.assignmentId)) {
            out.push_back(seq);
        }
    }
    return out;
}

/// Reorders per-sorted-row predictions back into the requested order.
std::vector<Label> reorderPredictions(const FeatureTable& table,
                                      const std::vector<Label>& rowLabels,
                                      const std::vector<std::string>& wanted) {
    std::map<std::string, Label> bySubject;
    for (std::size_t r = 0; r < table.subjects.size(); ++r) {
        bySubject[table.subjects[r]] = rowLabels[r];
    }
    std::vector<Label> out;
    out.reserve(wanted.size());
    for (const std::string& subject : wanted) out.push_back(bySubject.at(subject));
    return out;
}

std::vector<Label> alignLabels(const FeatureTable& table,
                               const std::vector<std::string>& subjects,
                               const std::vector<Label>& labels) {
    std::map<std::string, Label> bySubject;
    for (std::size_t i = 0; i < subjects.size(); ++i) bySubject[subjects[i]] = labels[i];
    std::vector<Label> out;
    out.reserve(table.subjects.size());
    for (const std::string& subject : table.subjects) out.push_back(bySubject.at(subject));
    return out;
}

/// Mines per assignment on the training split and returns the stacked raw
/// feature table builder shared by training and prediction.
struct FittedCdsm {
    std::vector<std::vector<ClassifiedPattern>> perAssignment;

    FeatureTable featuresFor(const std::vector<EventSequence>& sequences,
                             const std::vector<std::string>& subjects,
                             const TrialConfig& config) const {
        std::vector<FeatureTable> tables;
        for (const auto& classified : perAssignment) {
            tables.push_back(buildFeatureTable(classified, sequences, subjects,
                                               config.mining.maxGap, config.threads));
        }
        return stackTables(tables);
    }
};

FittedCdsm mineTrial(const std::vector<EventSequence>& trainSequences,
                     const std::map<std::string, Label>& trainLabels,
                     const TrialConfig& config) {
    FittedCdsm fitted;
    for (const std::string& assignment : config.assignments) {
        const GroupedSequences grouped = groupSequences(trainSequences, assignment, trainLabels);
        if (grouped.high.empty() || grouped.low.empty()) {
            fitted.perAssignment.emplace_back();  // nothing minable for this assignment
            continue;
        }
        fitted.perAssignment.push_back(mineAndClassify(grouped.high, grouped.low, config.mining,
                                                       config.classify, config.threads));
    }
    return fitted;
}

}  // namespace

TrialOutcome runTrial(const std::vector<EventSequence>& sequences,
                      const std::map<std::string, std::map<std::string, double>>& grades,
                      const std::map<std::string, Label>& labels, const TrialConfig& config) {
    TrialOutcome outcome;
    outcome.trialIndex = config.trialIndex;
    outcome.assignments = config.assignments;

    const std::set<std::string> assignmentSet(config.assignments.begin(),
                                              config.assignments.end());
    std::vector<EventSequence> trialSequences;
    for (const EventSequence& seq : sequences) {
        if (assignmentSet.contains(seq.assignmentId)) trialSequences.push_back(seq);
    }

    std::vector<std::string> subjects;
    for (const auto& [subject, label] : labels) subjects.push_back(subject);

    std::set<std::string> warnings;

    const TrainPredictFn cdsmFn = [&](const std::vector<std::string>& trainSubjects,
                                      const std::vector<Label>& trainLabels,
                                      const std::vector<std::string>& testSubjects) {
        std::map<std::string, Label> trainLabelMap;
        for (std::size_t i = 0; i < trainSubjects.size(); ++i) {
            trainLabelMap[trainSubjects[i]] = trainLabels[i];
        }
        const std::set<std::string> trainSet(trainSubjects.begin(), trainSubjects.end());
        const std::vector<EventSequence> trainSeqs =
            sequencesForSubjects(trialSequences, trainSet, assignmentSet);

        const FittedCdsm fitted = mineTrial(trainSeqs, trainLabelMap, config);
        const FeatureTable trainTable = fitted.featuresFor(trainSeqs, trainSubjects, config);
        if (trainTable.columnCount() == 0) {
            // No pattern survived classification: fall back to the
            // training majority so the rotation stays comparable.
            warnings.insert("no differential patterns in at least one rotation; "
                            "majority fallback used");
            return majorityBaseline(trainLabels, testSubjects.size());
        }
        const Discretizer discretizer = fitDiscretizer(trainTable);
        const FeatureTable discTrain = applyDiscretizer(discretizer, trainTable);
        const StumpModel model = trainAdaBoost(
            discTrain, alignLabels(discTrain, trainSubjects, trainLabels), config.boostingRounds);

        const std::set<std::string> testSet(testSubjects.begin(), testSubjects.end());
        const std::vector<EventSequence> testSeqs =
            sequencesForSubjects(trialSequences, testSet, assignmentSet);
        const FeatureTable testTable = fitted.featuresFor(testSeqs, testSubjects, config);
        const FeatureTable discTest = applyDiscretizer(discretizer, testTable);
        return reorderPredictions(discTest, predictLabels(model, discTest), testSubjects);
    };

    const TrainPredictFn majorityFn = [&](const std::vector<std::string>&,
                                          const std::vector<Label>& trainLabels,
                                          const std::vector<std::string>& testSubjects) {
        return majorityBaseline(trainLabels, testSubjects.size());
    };

    const TrainPredictFn expertFn = [&](const std::vector<std::string>& trainSubjects,
                                        const std::vector<Label>& trainLabels,
                                        const std::vector<std::string>& testSubjects) {
        ExpertFeatureResult train =
            expertRuleFeatures(trialSequences, grades, trainSubjects, config.assignments);
        for (const std::string& warning : train.warnings) warnings.insert(warning);
        const StumpModel model =
            trainAdaBoost(train.table, trainLabels, config.boostingRounds);
        const ExpertFeatureResult test =
            expertRuleFeatures(trialSequences, grades, testSubjects, config.assignments);
        return predictLabels(model, test.table);
    };

    outcome.cdsm = crossValidate(subjects, labels, config.seed, cdsmFn);
    outcome.majority = crossValidate(subjects, labels, config.seed, majorityFn);
    outcome.expertRule = crossValidate(subjects, labels, config.seed, expertFn);
    outcome.warnings.assign(warnings.begin(), warnings.end());
    return outcome;
}

std::vector<std::string> assignmentOrder(const std::string& labelsCsv) {
    const CsvTable table = readCsv(labelsCsv);
    if (table.header.size() < 2) {
        throw FormatError("labels file: no assignment grade columns");
    }
    return std::vector<std::string>(table.header.begin() + 1, table.header.end());
}

std::vector<ClassifiedPattern> minePopulation(const std::vector<EventSequence>& sequences,
                                              const std::map<std::string, Label>& labels,
                                              const std::vector<std::string>& assignments,
                                              const MiningParams& params,
                                              const ClassifyOptions& options, int threads) {
    std::vector<ClassifiedPattern> all;
    for (const std::string& assignment : assignments) {
        const GroupedSequences grouped = groupSequences(sequences, assignment, labels);
        if (grouped.high.empty() || grouped.low.empty()) continue;
        std::vector<ClassifiedPattern> classified =
            mineAndClassify(grouped.high, grouped.low, params, options, threads);
        all.insert(all.end(), std::make_move_iterator(classified.begin()),
                   std::make_move_iterator(classified.end()));
    }
    return all;
}

namespace {

std::string formatMetric(double value) {
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "%.3f", value);
    return buffer;
}

std::string summaryGrid(const std::vector<TrialOutcome>& trials) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Trial", "Model", "Accuracy", "Precision", "Recall"});
    for (const TrialOutcome& trial : trials) {
        const std::string name = "M" + std::to_string(trial.trialIndex);
        const auto addRow = [&](const std::string& model, const Metrics& metrics) {
            cells.push_back({name, model, formatMetric(metrics.accuracy),
                             formatMetric(metrics.precision), formatMetric(metrics.recall)});
        };
        addRow("CDSM", trial.cdsm.aggregate);
        addRow("Majority", trial.majority.aggregate);
        addRow("ExpertRule", trial.expertRule.aggregate);
    }
    std::vector<std::size_t> widths(cells.front().size(), 0);
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += "  ";
            out += row[c];
            if (c + 1 < row.size()) out.append(widths[c] - row[c].size(), ' ');
        }
        out += '\n';
    }
    return out;
}

}  // namespace

PipelineResult runPipeline(const PipelineConfig& config) {
    namespace fs = std::filesystem;
    PipelineResult result;

    const std::vector<RawEvent> rawEvents = parseProgSnap2(readTextFile(config.eventsPath));
    const CategorizeResult categorized = categorize(rawEvents, config.scheme);
    const std::vector<EventSequence>& sequences = categorized.sequences;

    const std::string labelsCsv = readTextFile(config.labelsPath);
    const auto grades = gradesFromCsv(labelsCsv);
    const std::vector<std::string> assignments = assignmentOrder(labelsCsv);
    result.labels = medianSplit(finalGrades(grades));

    std::error_code ec;
    fs::create_directories(config.outDir, ec);
    if (ec) throw IoError("cannot create output directory \"" + config.outDir + "\"");
    const auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = (fs::path(config.outDir) / name).string();
        writeTextFile(path, content);
        result.writtenFiles.push_back(path);
    };

    emit("sequences.jsonl", sequencesToJsonl(sequences));

    // Full-population mining per assignment: the interpretation artifacts.
    std::size_t nHigh = 0;
    std::size_t nLow = 0;
    for (const auto& [subject, label] : result.labels) {
        (label == Label::High ? nHigh : nLow) += 1;
    }
    const std::vector<ClassifiedPattern> allClassified = minePopulation(
        sequences, result.labels, assignments, config.mining, config.classify, config.threads);
    emit("patterns.json",
         patternsToJson(allClassified, nHigh, nLow, config.mining.maxGap));

    const std::vector<PatternReportRow> reportRows =
        buildPatternReport(allClassified, nHigh, nLow, config.mining.maxGap);
    const std::vector<std::size_t> selected = selectTopFraction(reportRows, config.topFraction);
    emit("report.json", reportToJson(reportRows, selected, nHigh, nLow, config.topFraction));
    emit("report.txt", renderReportText(reportRows, selected));

    // Full-population features and model, for inspection and reuse.
    {
        std::vector<std::string> subjects;
        for (const auto& [subject, label] : result.labels) subjects.push_back(subject);
        const FeatureTable raw =
            buildFeatureTable(allClassified, sequences, subjects, config.mining.maxGap,
                              config.threads);
        emit("features.csv", featuresToCsv(raw));
        if (raw.columnCount() > 0) {
            TrainedModel model;
            model.discretizer = fitDiscretizer(raw);
            std::vector<Label> labelVec;
            labelVec.reserve(subjects.size());
            for (const std::string& subject : subjects) labelVec.push_back(result.labels[subject]);
            model.stumps = trainAdaBoost(applyDiscretizer(model.discretizer, raw), labelVec,
                                         config.boostingRounds);
            emit("model.json", modelToJson(model));
        }
    }

    std::vector<int> trialIndices;
    if (config.trial) {
        if (*config.trial < 1 || *config.trial > static_cast<int>(assignments.size())) {
            throw ValidationError("trial index out of range: " + std::to_string(*config.trial));
        }
        trialIndices.push_back(*config.trial);
    } else {
        for (int i = 1; i <= static_cast<int>(assignments.size()); ++i) trialIndices.push_back(i);
    }

    for (int index : trialIndices) {
        TrialConfig trialConfig;
        trialConfig.trialIndex = index;
        trialConfig.assignments.assign(assignments.begin(), assignments.begin() + index);
        trialConfig.scheme = config.scheme;
        trialConfig.mining = config.mining;
        trialConfig.classify = config.classify;
        trialConfig.boostingRounds = config.boostingRounds;
        trialConfig.seed = config.seed;
        trialConfig.threads = config.threads;

        TrialOutcome outcome = runTrial(sequences, grades, result.labels, trialConfig);
        const std::string prefix = "trial_M" + std::to_string(index) + "_";
        emit(prefix + "cdsm.json", evaluationToJson(outcome.cdsm));
        emit(prefix + "majority.json", evaluationToJson(outcome.majority));
        emit(prefix + "expert.json", evaluationToJson(outcome.expertRule));
        result.trials.push_back(std::move(outcome));
    }

    result.summaryText = summaryGrid(result.trials);
    emit("summary.txt", result.summaryText);
    return result;
}

}  // namespace cdsm

#include "cdsm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cdsm/errors.hpp"
#include "cdsm/rng.hpp"

namespace cdsm {

std::string toString(Label label) {
    return label == Label::High ? "HIGH" : "LOW";
}

Label parseLabel(const std::string& text) {
    if (text == "HIGH") return Label::High;
    if (text == "LOW") return Label::Low;
    throw FormatError("unknown label: \"" + text + "\"");
}

std::map<std::string, Label> medianSplit(const std::map<std::string, double>& grades) {
    if (grades.size() < 2) throw ValidationError("medianSplit: need at least 2 graded subjects");
    std::vector<double> values;
    values.reserve(grades.size());
    for (const auto& [subject, grade] : grades) values.push_back(grade);
    const double threshold = interpolatedQuantile(values, 0.5);

    std::map<std::string, Label> labels;
    bool nextTieHigh = true;
    for (const auto& [subject, grade] : grades) {
        if (grade > threshold) {
            labels[subject] = Label::High;
        } else if (grade < threshold) {
            labels[subject] = Label::Low;
        } else {
            labels[subject] = nextTieHigh ? Label::High : Label::Low;
            nextTieHigh = !nextTieHigh;
        }
    }
    return labels;
}

namespace {

/// Stump weights are capped where the weighted error hits zero; e^±kAlphaCap
/// dominates any realistic vote sum without overflowing.
constexpr double kAlphaCap = 12.0;

/// Errors this close to 0.5 are chance-level: after a round, the chosen
/// stump's reweighted error is exactly 0.5 in real arithmetic but lands a
/// few ulps away through exp/log, and without the floor such a stump would
/// be kept with a ~1e-16 weight.
constexpr double kChanceBand = 1e-12;

double labelSign(Label label) {
    return label == Label::Low ? 1.0 : -1.0;
}

/// Candidate thresholds for one column: one below the minimum (so the
/// stump can vote one class everywhere) plus the midpoints between
/// consecutive distinct values.
std::vector<double> candidateThresholds(const FeatureTable& features, std::size_t column) {
    std::set<double> distinct;
    for (std::size_t r = 0; r < features.rowCount(); ++r) {
        distinct.insert(features.values[r][column]);
    }
    std::vector<double> sorted(distinct.begin(), distinct.end());
    std::vector<double> thresholds;
    thresholds.reserve(sorted.size());
    thresholds.push_back(sorted.front() - 1.0);
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        thresholds.push_back((sorted[i - 1] + sorted[i]) / 2.0);
    }
    return thresholds;
}

double stumpVote(const Stump& stump, double value) {
    const double fired = value > stump.threshold ? 1.0 : -1.0;
    return fired * static_cast<double>(stump.polarity);
}

}  // namespace

StumpModel trainAdaBoost(const FeatureTable& features, const std::vector<Label>& labels,
                         int rounds) {
    const std::size_t n = features.rowCount();
    if (n < 2) throw ValidationError("trainAdaBoost: need at least 2 subjects");
    if (labels.size() != n) throw ValidationError("trainAdaBoost: label count mismatch");
    if (rounds < 1) throw ValidationError("trainAdaBoost: rounds must be positive");
    if (features.columnCount() == 0) {
        throw ValidationError("trainAdaBoost: feature table has no columns");
    }
    const bool hasLow = std::find(labels.begin(), labels.end(), Label::Low) != labels.end();
    const bool hasHigh = std::find(labels.begin(), labels.end(), Label::High) != labels.end();
    if (!hasLow || !hasHigh) throw ValidationError("trainAdaBoost: both classes required");

    StumpModel model;
    model.columnNames.reserve(features.columnCount());
    for (const FeatureColumn& column : features.columns) model.columnNames.push_back(column.name);

    std::vector<std::vector<double>> thresholds(features.columnCount());
    for (std::size_t c = 0; c < features.columnCount(); ++c) {
        thresholds[c] = candidateThresholds(features, c);
    }

    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    for (int round = 0; round < rounds; ++round) {
        // Exhaustive best stump; iteration order (column asc, threshold
        // asc, +1 before -1) combined with strict improvement makes ties
        // resolve to the lowest column then lowest threshold.
        Stump best;
        double bestError = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < features.columnCount(); ++c) {
            for (double threshold : thresholds[c]) {
                double errorPlus = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    const double fired = features.values[r][c] > threshold ? 1.0 : -1.0;
                    if (fired != labelSign(labels[r])) errorPlus += weights[r];
                }
                const double errorMinus = 1.0 - errorPlus;
                if (errorPlus < bestError) {
                    bestError = errorPlus;
                    best = Stump{c, threshold, 1, 0.0};
                }
                if (errorMinus < bestError) {
                    bestError = errorMinus;
                    best = Stump{c, threshold, -1, 0.0};
                }
            }
        }
        if (bestError >= 0.5 - kChanceBand) break;  // no better-than-chance stump left
        if (bestError <= 0.0) {
            best.weight = kAlphaCap;
            model.rounds.push_back(best);
            break;
        }
        best.weight = 0.5 * std::log((1.0 - bestError) / bestError);
        model.rounds.push_back(best);

        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double vote = stumpVote(best, features.values[r][best.column]);
            weights[r] *= std::exp(-best.weight * labelSign(labels[r]) * vote);
            total += weights[r];
        }
        for (double& w : weights) w /= total;
    }
    return model;
}

namespace {

std::vector<std::size_t> resolveModelColumns(const StumpModel& model,
                                             const FeatureTable& features) {
    std::vector<std::size_t> mapping(model.columnNames.size());
    for (std::size_t i = 0; i < model.columnNames.size(); ++i) {
        const auto index = features.findColumn(model.columnNames[i]);
        if (!index) {
            throw ValidationError("predict: feature table lacks column \"" +
                                  model.columnNames[i] + "\"");
        }
        mapping[i] = *index;
    }
    return mapping;
}

}  // namespace

std::vector<double> predictMargins(const StumpModel& model, const FeatureTable& features) {
    const std::vector<std::size_t> mapping = resolveModelColumns(model, features);
    std::vector<double> margins(features.rowCount(), 0.0);
    for (const Stump& stump : model.rounds) {
        const std::size_t column = mapping[stump.column];
        for (std::size_t r = 0; r < features.rowCount(); ++r) {
            margins[r] += stump.weight * stumpVote(stump, features.values[r][column]);
        }
    }
    return margins;
}

std::vector<Label> predictLabels(const StumpModel& model, const FeatureTable& features) {
    const std::vector<double> margins = predictMargins(model, features);
    std::vector<Label> labels(margins.size());
    for (std::size_t r = 0; r < margins.size(); ++r) {
        // Zero margin resolves to LOW: flagging for help is the safer miss.
        labels[r] = margins[r] > 0.0 ? Label::Low : (margins[r] < 0.0 ? Label::High : Label::Low);
    }
    return labels;
}

Metrics computeMetrics(std::span<const Label> predicted, std::span<const Label> actual) {
    if (predicted.size() != actual.size()) {
        throw ValidationError("computeMetrics: prediction/actual length mismatch");
    }
    if (predicted.empty()) throw ValidationError("computeMetrics: empty inputs");
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool predLow = predicted[i] == Label::Low;
        const bool actLow = actual[i] == Label::Low;
        if (predLow && actLow) ++tp;
        else if (predLow && !actLow) ++fp;
        else if (!predLow && actLow) ++fn;
        else ++tn;
    }
    Metrics metrics;
    const double n = static_cast<double>(predicted.size());
    metrics.accuracy = (tp + tn) / n;
    metrics.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    metrics.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    return metrics;
}

std::vector<Label> majorityBaseline(std::span<const Label> trainLabels, std::size_t testCount) {
    if (trainLabels.empty()) throw ValidationError("majorityBaseline: empty training labels");
    std::size_t low = 0;
    for (Label label : trainLabels) {
        if (label == Label::Low) ++low;
    }
    const std::size_t high = trainLabels.size() - low;
    const Label majority = low >= high ? Label::Low : Label::High;
    return std::vector<Label>(testCount, majority);
}

FoldPlan makeFolds(std::vector<std::string> subjects, int foldCount, std::uint64_t seed) {
    if (foldCount < 1) throw ValidationError("makeFolds: fold count must be positive");
    if (subjects.size() < static_cast<std::size_t>(foldCount)) {
        throw ValidationError("makeFolds: fewer subjects than folds");
    }
    DeterministicRng rng(seed);
    rng.shuffle(subjects);

    FoldPlan plan;
    plan.folds.resize(static_cast<std::size_t>(foldCount));
    const std::size_t base = subjects.size() / static_cast<std::size_t>(foldCount);
    const std::size_t extra = subjects.size() % static_cast<std::size_t>(foldCount);
    std::size_t next = 0;
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        plan.folds[f].assign(subjects.begin() + static_cast<std::ptrdiff_t>(next),
                             subjects.begin() + static_cast<std::ptrdiff_t>(next + size));
        next += size;
    }
    return plan;
}

EvaluationResult crossValidate(const std::vector<std::string>& subjects,
                               const std::map<std::string, Label>& labels, std::uint64_t seed,
                               const TrainPredictFn& trainPredict) {
    if (subjects.size() < 10) {
        throw ValidationError("crossValidate: need at least 10 subjects");
    }
    for (const std::string& subject : subjects) {
        if (!labels.contains(subject)) {
            throw ValidationError("crossValidate: no label for subject \"" + subject + "\"");
        }
    }

    EvaluationResult result;
    result.seed = seed;
    result.folds = makeFolds(subjects, 10, seed);
    const std::size_t foldCount = result.folds.folds.size();
    for (std::size_t r = 0; r < foldCount; ++r) {
        RotationResult rotation;
        rotation.testFold = static_cast<int>(r);
        rotation.discardFold = static_cast<int>((r + 1) % foldCount);
        rotation.testSubjects = result.folds.folds[r];

        std::vector<std::string> trainSubjects;
        for (std::size_t f = 0; f < foldCount; ++f) {
            if (f == r || f == (r + 1) % foldCount) continue;
            const std::vector<std::string>& fold = result.folds.folds[f];
            trainSubjects.insert(trainSubjects.end(), fold.begin(), fold.end());
        }
        std::vector<Label> trainLabels;
        trainLabels.reserve(trainSubjects.size());
        for (const std::string& subject : trainSubjects) trainLabels.push_back(labels.at(subject));

        rotation.predicted = trainPredict(trainSubjects, trainLabels, rotation.testSubjects);
        if (rotation.predicted.size() != rotation.testSubjects.size()) {
            throw IntegrityError("crossValidate: prediction count mismatch in rotation " +
                                 std::to_string(r));
        }
        rotation.actual.reserve(rotation.testSubjects.size());
        for (const std::string& subject : rotation.testSubjects) {
            rotation.actual.push_back(labels.at(subject));
        }
        rotation.metrics = computeMetrics(rotation.predicted, rotation.actual);
        result.rotations.push_back(std::move(rotation));
    }

    for (const RotationResult& rotation : result.rotations) {
        result.aggregate.accuracy += rotation.metrics.accuracy;
        result.aggregate.precision += rotation.metrics.precision;
        result.aggregate.recall += rotation.metrics.recall;
    }
    const double count = static_cast<double>(result.rotations.size());
    result.aggregate.accuracy /= count;
    result.aggregate.precision /= count;
    result.aggregate.recall /= count;
    return result;
}

ExpertFeatureResult expertRuleFeatures(
    const std::vector<EventSequence>& sequences,
    const std::map<std::string, std::map<std::string, double>>& gradesBySubject,
    const std::vector<std::string>& subjects, const std::vector<std::string>& trialAssignments) {
    ExpertFeatureResult result;
    FeatureTable& table = result.table;
    table.subjects = subjects;

    const std::set<std::string> wanted(trialAssignments.begin(), trialAssignments.end());
    bool anyTimestamps = false;
    for (const EventSequence& seq : sequences) {
        if (!wanted.contains(seq.assignmentId)) continue;
        if (seq.profile.firstTimestampMs && seq.profile.lastTimestampMs) anyTimestamps = true;
    }
    if (!anyTimestamps) {
        result.warnings.push_back("timestamps unavailable: Time feature omitted");
    }

    const auto addColumn = [&](const std::string& name) {
        FeatureColumn column;
        column.name = name;
        column.cls = PatternClass::Discarded;
        table.columns.push_back(std::move(column));
    };
    addColumn("expert:deletions");
    addColumn("expert:moves");
    addColumn("expert:runs");
    if (anyTimestamps) addColumn("expert:time_minutes");
    addColumn("expert:nodes");
    // Grades of every assignment before the trial's last one are known
    // inputs at prediction time.
    std::vector<std::string> priorAssignments;
    if (trialAssignments.size() > 1) {
        priorAssignments.assign(trialAssignments.begin(), trialAssignments.end() - 1);
    }
    for (const std::string& assignment : priorAssignments) addColumn("grade:" + assignment);

    table.values.assign(subjects.size(), std::vector<double>(table.columns.size(), 0.0));
    std::map<std::string, std::size_t> rowIndex;
    for (std::size_t r = 0; r < subjects.size(); ++r) rowIndex[subjects[r]] = r;

    for (const EventSequence& seq : sequences) {
        if (!wanted.contains(seq.assignmentId)) continue;
        const auto row = rowIndex.find(seq.subjectId);
        if (row == rowIndex.end()) continue;
        std::vector<double>& cells = table.values[row->second];
        std::size_t c = 0;
        cells[c++] += static_cast<double>(seq.profile.rawCount(BaseEvent::EditDel));
        cells[c++] += static_cast<double>(seq.profile.rawCount(BaseEvent::Edit));
        cells[c++] += static_cast<double>(seq.profile.rawCount(BaseEvent::Run));
        if (anyTimestamps) {
            if (seq.profile.firstTimestampMs && seq.profile.lastTimestampMs) {
                cells[c] += static_cast<double>(*seq.profile.lastTimestampMs -
                                                *seq.profile.firstTimestampMs) /
                            60000.0;
            }
            ++c;
        }
        if (seq.profile.finalNodeMetric) {
            cells[c] += static_cast<double>(*seq.profile.finalNodeMetric);
        }
    }

    const std::size_t gradeOffset = table.columns.size() - priorAssignments.size();
    for (std::size_t r = 0; r < subjects.size(); ++r) {
        const auto subjectGrades = gradesBySubject.find(subjects[r]);
        if (subjectGrades == gradesBySubject.end()) continue;
        for (std::size_t g = 0; g < priorAssignments.size(); ++g) {
            const auto grade = subjectGrades->second.find(priorAssignments[g]);
            if (grade != subjectGrades->second.end()) {
                table.values[r][gradeOffset + g] = grade->second;
            }
        }
    }
    return result;
}

}  // namespace cdsm

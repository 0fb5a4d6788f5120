#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cdsm/features.hpp"

namespace cdsm {

enum class Label : std::uint8_t {
    High,
    Low,
};

std::string toString(Label label);
Label parseLabel(const std::string& text);

/// Splits subjects at the median grade: above -> High, below -> Low,
/// exactly at the median -> alternate High-first in subject-id order so
/// the groups stay balanced. Requires at least two graded subjects with
/// non-identical grades.
std::map<std::string, Label> medianSplit(const std::map<std::string, double>& grades);

struct TrialConfig {
    int trialIndex = 1;
    std::vector<std::string> assignments;  // the course prefix this trial uses
    Scheme scheme = Scheme::General;
    MiningParams mining;
    ClassifyOptions classify;
    int boostingRounds = 50;
    std::uint64_t seed = 1;
    int threads = 1;
};

/// One boosting round: h(x) = polarity when x[column] > threshold, else
/// -polarity, where +1 votes Low and -1 votes High.
struct Stump {
    std::size_t column = 0;
    double threshold = 0.0;
    int polarity = 1;
    double weight = 0.0;
};

struct StumpModel {
    std::vector<Stump> rounds;
    std::vector<std::string> columnNames;  // identity of the training columns
};

/// Classic discrete AdaBoost over exhaustively enumerated decision stumps.
/// Ties in stump choice break toward the lowest column index, then the
/// lowest threshold, then positive polarity. A perfect stump is kept with
/// a capped weight and stops training; a round with weighted error >= 0.5
/// is discarded and stops training. Requires both classes present.
StumpModel trainAdaBoost(const FeatureTable& features, const std::vector<Label>& labels,
                         int rounds);

/// A fitted discretizer together with the boosted stumps trained on its
/// output; the unit that model files store.
struct TrainedModel {
    Discretizer discretizer;
    StumpModel stumps;
};

/// Weighted-vote prediction; a zero margin resolves to Low. Columns are
/// matched by name; a missing column throws ValidationError.
std::vector<Label> predictLabels(const StumpModel& model, const FeatureTable& features);

/// Margin (sum of weighted votes, positive = Low) per row.
std::vector<double> predictMargins(const StumpModel& model, const FeatureTable& features);

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

/// Low is the positive class. Precision is 0 when nothing was predicted
/// Low; recall is 0 when nothing was actually Low.
Metrics computeMetrics(std::span<const Label> predicted, std::span<const Label> actual);

/// Every test subject receives the training-majority label; ties go Low.
std::vector<Label> majorityBaseline(std::span<const Label> trainLabels, std::size_t testCount);

struct FoldPlan {
    std::vector<std::vector<std::string>> folds;
};

/// Shuffles subjects by seed and deals them into `foldCount` near-equal
/// folds (sizes differ by at most one).
FoldPlan makeFolds(std::vector<std::string> subjects, int foldCount, std::uint64_t seed);

struct RotationResult {
    int testFold = 0;
    int discardFold = 0;
    std::vector<std::string> testSubjects;
    std::vector<Label> predicted;
    std::vector<Label> actual;
    Metrics metrics;
};

struct EvaluationResult {
    FoldPlan folds;
    std::vector<RotationResult> rotations;
    Metrics aggregate;  // macro-average over rotations
    std::uint64_t seed = 0;
};

/// Trains on the given train subjects and returns predicted labels for the
/// test subjects, in order. The callee re-fits its whole pipeline from
/// scratch; nothing may leak from outside the train set.
using TrainPredictFn = std::function<std::vector<Label>(
    const std::vector<std::string>& trainSubjects, const std::vector<Label>& trainLabels,
    const std::vector<std::string>& testSubjects)>;

/// Modified hold-out 10-fold cross validation: per rotation r the test set
/// is fold r, fold (r+1) mod 10 is discarded, and the remaining 8 folds
/// train. Metrics are macro-averaged over rotations. Requires at least 10
/// subjects, all present in `labels`.
EvaluationResult crossValidate(const std::vector<std::string>& subjects,
                               const std::map<std::string, Label>& labels, std::uint64_t seed,
                               const TrainPredictFn& trainPredict);

struct ExpertFeatureResult {
    FeatureTable table;
    std::vector<std::string> warnings;
};

/// The expert-rule baseline's feature table: per subject, summed over the
/// trial's assignments, the raw pre-collapse counts of deletions, plain
/// edits, and runs, total minutes between first and last timestamp, and
/// the final node metric; plus one grade column per assignment before the
/// trial's last. The time column is omitted (with a warning) when
/// timestamps are unavailable.
ExpertFeatureResult expertRuleFeatures(
    const std::vector<EventSequence>& sequences,
    const std::map<std::string, std::map<std::string, double>>& gradesBySubject,
    const std::vector<std::string>& subjects, const std::vector<std::string>& trialAssignments);

}  // namespace cdsm

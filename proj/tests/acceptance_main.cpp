// Acceptance gate: one check per release criterion, each printing a
// single PASS/FAIL line with the measured values. The process exit code
// is the number of failed criteria, so the test harness fails when any
// criterion does.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cdsm/errors.hpp"
#include "cdsm/features.hpp"
#include "cdsm/ingest.hpp"
#include "cdsm/model.hpp"
#include "cdsm/pipeline.hpp"
#include "cdsm/seqmine.hpp"
#include "cdsm/serialize.hpp"
#include "cdsm/statistics.hpp"
#include "cdsm/synth.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace cdsm;
using Clock = std::chrono::steady_clock;

namespace {

double secondsSince(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string format(const char* fmt, ...) {
    char buffer[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buffer, sizeof(buffer), fmt, args);
    va_end(args);
    return buffer;
}

// ------------------------------------------------------------ criterion 1

Outcome miningOracleEquivalence() {
    const std::vector<BaseEvent> alphabetPool = {BaseEvent::EditIns, BaseEvent::Run,
                                                 BaseEvent::File, BaseEvent::Var};
    std::mt19937 rng(411);
    const auto start = Clock::now();
    int equal = 0;
    const int instances = 200;
    for (int trial = 0; trial < instances; ++trial) {
        const int alphabet = 1 + static_cast<int>(rng() % 4);
        const int seqCount = 1 + static_cast<int>(rng() % 6);
        std::vector<EventSequence> sequences(seqCount);
        for (int s = 0; s < seqCount; ++s) {
            const int length = 1 + static_cast<int>(rng() % 8);
            sequences[s].subjectId = "S" + std::to_string(s);
            sequences[s].assignmentId = "A1";
            for (int i = 0; i < length; ++i) {
                sequences[s].events.push_back(
                    EventType{alphabetPool[rng() % alphabet], {}});
            }
            sequences[s].timestamps.resize(sequences[s].events.size());
        }
        MiningParams params;
        params.maxGap = static_cast<int>(rng() % 3);
        params.maxLength = 1 + static_cast<int>(rng() % 4);
        const std::int64_t minCount = 1 + static_cast<std::int64_t>(rng() % seqCount);
        params.minPercentileSupport =
            static_cast<double>(minCount) / static_cast<double>(seqCount);

        const std::vector<Pattern> mined = enumerateFrequent(sequences, params);
        const std::vector<Pattern> reference =
            oracle::frequentPatterns(sequences, minCount, params.maxGap, params.maxLength);
        if (mined == reference) ++equal;
    }
    const double elapsed = secondsSince(start);
    Outcome outcome;
    outcome.pass = equal == instances && elapsed < 10.0;
    outcome.detail = format("%d/%d instances identical to brute force in %.2fs (limit 10s)",
                            equal, instances, elapsed);
    return outcome;
}

// ------------------------------------------------------------ criterion 2

Outcome statisticsFidelity() {
    double worstChi = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double statistic = 0.3 * i;
        worstChi = std::max(worstChi, std::fabs(chiSquaredUpperTail(statistic, 1.0) -
                                                oracle::chiSquaredUpperTailRef(statistic, 1.0)));
    }
    double worstT = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double t = 0.15 * i;
        const double df = 1.0 + (i % 10) * 3.3;
        worstT = std::max(worstT, std::fabs(studentTwoSidedP(t, df) -
                                            oracle::studentTwoSidedRef(t, df)));
    }
    const double hg1 = oddsRatio(0.52, 0.31).value;
    const double lg2 = oddsRatio(0.22, 0.42).value;

    Outcome outcome;
    outcome.pass = worstChi <= 1e-9 && worstT <= 1e-9 && std::fabs(hg1 - 2.41) <= 0.01 &&
                   std::fabs(lg2 - 0.39) <= 0.01;
    outcome.detail = format(
        "max |dp| chi2=%.2e t=%.2e (limit 1e-9); odds 2.41->%.4f 0.39->%.4f (tol 0.01)",
        worstChi, worstT, hg1, lg2);
    return outcome;
}

// ------------------------------------------------------------ criterion 3

struct MinedDataset {
    std::vector<ClassifiedPattern> classified;
    double seconds = 0.0;
};

MinedDataset mineGenerated(const SynthConfig& config) {
    const auto start = Clock::now();
    const SynthDataset dataset = generateDataset(config);
    const CategorizeResult categorized =
        categorize(parseProgSnap2(dataset.eventsCsv), Scheme::General);
    const std::map<std::string, Label> labels =
        medianSplit(finalGrades(gradesFromCsv(dataset.labelsCsv)));
    MinedDataset result;
    result.classified =
        minePopulation(categorized.sequences, labels, assignmentOrder(dataset.labelsCsv),
                       MiningParams{}, ClassifyOptions{});
    result.seconds = secondsSince(start);
    return result;
}

Outcome plantedRecovery() {
    const int seeds = 20;
    int fSeeds = 0;
    int dSeeds = 0;
    int dirtySeeds = 0;
    double worstSeconds = 0.0;

    for (int seed = 1; seed <= seeds; ++seed) {
        SynthConfig config;  // paper-shaped defaults: 106 subjects, 5 assignments, ~500 events
        config.seed = static_cast<std::uint64_t>(seed);
        const MinedDataset mined = mineGenerated(config);
        worstSeconds = std::max(worstSeconds, mined.seconds);

        std::map<std::pair<std::string, std::string>, PatternClass> byKey;
        for (const ClassifiedPattern& entry : mined.classified) {
            byKey[{entry.stats.assignmentId, toString(entry.stats.pattern)}] =
                entry.classification.label;
        }
        bool fOk = true;
        bool dOk = true;
        for (const PlantSpec& plant : config.plants) {
            for (const std::string& assignment : config.assignments) {
                const auto found = byKey.find({assignment, toString(plant.pattern)});
                const bool correct =
                    found != byKey.end() && found->second == plant.expectedClass;
                if (plant.expectedClass == PatternClass::FH ||
                    plant.expectedClass == PatternClass::FL) {
                    fOk = fOk && correct;
                } else {
                    dOk = dOk && correct;
                }
            }
        }
        fSeeds += fOk ? 1 : 0;
        dSeeds += dOk ? 1 : 0;
    }

    for (int seed = 1; seed <= seeds; ++seed) {
        SynthConfig config = SynthConfig::nullCalibration();
        config.seed = static_cast<std::uint64_t>(seed);
        const MinedDataset mined = mineGenerated(config);
        worstSeconds = std::max(worstSeconds, mined.seconds);
        bool dirty = false;
        for (const ClassifiedPattern& entry : mined.classified) {
            if (entry.classification.label != PatternClass::Discarded) dirty = true;
        }
        dirtySeeds += dirty ? 1 : 0;
    }

    Outcome outcome;
    outcome.pass = fSeeds >= 19 && dSeeds >= 18 && dirtySeeds <= 2 && worstSeconds < 60.0;
    outcome.detail = format(
        "FH/FL %d/20 (need >=19), DH/DL %d/20 (need >=18), null dirty %d/20 (allow <=2), "
        "slowest seed %.1fs (limit 60s)",
        fSeeds, dSeeds, dirtySeeds, worstSeconds);
    return outcome;
}

// ------------------------------------------------------------ criterion 4

Outcome endToEndPrediction() {
    SynthConfig config;  // default plants: containment 0.8 vs 0.2
    config.seed = 1;
    const SynthDataset dataset = generateDataset(config);
    const CategorizeResult categorized =
        categorize(parseProgSnap2(dataset.eventsCsv), Scheme::General);
    const auto grades = gradesFromCsv(dataset.labelsCsv);
    const std::map<std::string, Label> labels = medianSplit(finalGrades(grades));
    const std::vector<std::string> assignments = assignmentOrder(dataset.labelsCsv);

    TrialConfig trial;
    trial.trialIndex = 1;
    trial.assignments = {assignments.front()};
    trial.boostingRounds = 50;
    trial.seed = 1;
    const TrialOutcome outcome = runTrial(categorized.sequences, grades, labels, trial);

    const double cdsm = outcome.cdsm.aggregate.accuracy;
    const double majority = outcome.majority.aggregate.accuracy;
    Outcome result;
    result.pass = cdsm >= 0.85 && cdsm > majority;
    result.detail = format("M1 accuracy %.3f (need >=0.85), majority %.3f (must be below)",
                           cdsm, majority);
    return result;
}

// ------------------------------------------------------------ criterion 5

FeatureTable randomTable(std::mt19937& rng, std::size_t rows, std::size_t cols) {
    FeatureTable table;
    for (std::size_t r = 0; r < rows; ++r) table.subjects.push_back("S" + std::to_string(r));
    for (std::size_t c = 0; c < cols; ++c) {
        FeatureColumn column;
        column.name = "f" + std::to_string(c);
        table.columns.push_back(column);
    }
    table.values.assign(rows, std::vector<double>(cols, 0.0));
    for (auto& row : table.values) {
        for (double& cell : row) cell = static_cast<double>(rng() % 4);
    }
    return table;
}

std::vector<Label> randomLabels(std::mt19937& rng, std::size_t rows) {
    std::vector<Label> labels(rows);
    bool sawLow = false;
    bool sawHigh = false;
    while (!(sawLow && sawHigh)) {
        sawLow = sawHigh = false;
        for (Label& label : labels) {
            label = rng() % 2 == 0 ? Label::Low : Label::High;
            (label == Label::Low ? sawLow : sawHigh) = true;
        }
    }
    return labels;
}

Outcome boostingProperties() {
    std::mt19937 rng(1309);
    int lossViolations = 0;
    int stumpMismatches = 0;
    const int datasets = 20;
    for (int trial = 0; trial < datasets; ++trial) {
        const std::size_t rows = rng() % 2 == 0 ? 8 : 16;  // exact binary uniform weights
        const std::size_t cols = 1 + rng() % 4;
        const FeatureTable table = randomTable(rng, rows, cols);
        const std::vector<Label> labels = randomLabels(rng, rows);

        // Exponential loss must never increase across the 50 rounds.
        const StumpModel model = trainAdaBoost(table, labels, 50);
        double previous = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= model.rounds.size(); ++k) {
            StumpModel prefix;
            prefix.columnNames = model.columnNames;
            prefix.rounds.assign(model.rounds.begin(),
                                 model.rounds.begin() + static_cast<std::ptrdiff_t>(k));
            const std::vector<double> margins = predictMargins(prefix, table);
            double loss = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                const double sign = labels[r] == Label::Low ? 1.0 : -1.0;
                loss += std::exp(-sign * margins[r]);
            }
            if (k > 0 && loss > previous + 1e-9) ++lossViolations;
            previous = loss;
        }

        // One round must reproduce the exhaustive best stump exactly.
        const std::vector<double> uniform(rows, 1.0 / static_cast<double>(rows));
        const oracle::StumpSearch best = oracle::bestStumpExhaustive(table, labels, uniform);
        const StumpModel single = trainAdaBoost(table, labels, 1);
        if (best.error >= 0.5) {
            if (!single.rounds.empty()) ++stumpMismatches;
        } else {
            const double expectedWeight =
                best.error <= 0.0 ? 12.0
                                  : 0.5 * std::log((1.0 - best.error) / best.error);
            if (single.rounds.size() != 1 || single.rounds[0].column != best.stump.column ||
                single.rounds[0].threshold != best.stump.threshold ||
                single.rounds[0].polarity != best.stump.polarity ||
                std::fabs(single.rounds[0].weight - expectedWeight) > 1e-12) {
                ++stumpMismatches;
            }
        }
    }
    Outcome outcome;
    outcome.pass = lossViolations == 0 && stumpMismatches == 0;
    outcome.detail = format(
        "%d datasets: %d exp-loss increases, %d single-round stump mismatches (need 0 and 0)",
        datasets, lossViolations, stumpMismatches);
    return outcome;
}

// ------------------------------------------------------------ criterion 6

Outcome foldStructure() {
    int violations = 0;
    std::string note;
    for (const int n : {20, 53, 106}) {
        std::vector<std::string> subjects;
        std::map<std::string, Label> labels;
        for (int i = 0; i < n; ++i) {
            char id[8];
            std::snprintf(id, sizeof(id), "S%03d", i);
            subjects.push_back(id);
            labels[id] = i % 3 == 0 ? Label::Low : Label::High;
        }

        const FoldPlan plan = makeFolds(subjects, 10, 42);
        std::multiset<std::string> dealt;
        const std::size_t base = static_cast<std::size_t>(n) / 10;
        for (const auto& fold : plan.folds) {
            if (fold.size() != base && fold.size() != base + 1) ++violations;
            dealt.insert(fold.begin(), fold.end());
        }
        if (plan.folds.size() != 10) ++violations;
        if (dealt != std::multiset<std::string>(subjects.begin(), subjects.end())) {
            ++violations;  // not a partition: missing, duplicated, or invented subjects
        }

        std::vector<std::vector<std::string>> trains;
        const TrainPredictFn fn = [&trains](const std::vector<std::string>& trainSubjects,
                                            const std::vector<Label>&,
                                            const std::vector<std::string>& testSubjects) {
            trains.push_back(trainSubjects);
            return std::vector<Label>(testSubjects.size(), Label::Low);
        };
        const EvaluationResult result = crossValidate(subjects, labels, 7, fn);
        if (result.rotations.size() != 10) ++violations;
        for (std::size_t r = 0; r < result.rotations.size(); ++r) {
            const RotationResult& rotation = result.rotations[r];
            if (rotation.testFold != static_cast<int>(r)) ++violations;
            if (rotation.discardFold != static_cast<int>((r + 1) % 10)) ++violations;

            const auto& folds = result.folds.folds;
            const std::set<std::string> test(folds[rotation.testFold].begin(),
                                             folds[rotation.testFold].end());
            const std::set<std::string> discard(folds[rotation.discardFold].begin(),
                                                folds[rotation.discardFold].end());
            std::set<std::string> expectedTrain;
            for (std::size_t f = 0; f < folds.size(); ++f) {
                if (static_cast<int>(f) == rotation.testFold ||
                    static_cast<int>(f) == rotation.discardFold) {
                    continue;
                }
                expectedTrain.insert(folds[f].begin(), folds[f].end());
            }
            const std::set<std::string> train(trains[r].begin(), trains[r].end());
            const std::set<std::string> observedTest(rotation.testSubjects.begin(),
                                                     rotation.testSubjects.end());
            if (train != expectedTrain) ++violations;       // exactly the other 8 folds
            if (observedTest != test) ++violations;
            for (const std::string& subject : train) {
                if (test.contains(subject) || discard.contains(subject)) ++violations;
            }
            for (const std::string& subject : test) {
                if (discard.contains(subject)) ++violations;
            }
            if (train.size() + test.size() + discard.size() != subjects.size()) ++violations;
        }
        note += format("N=%d ok; ", n);
    }
    Outcome outcome;
    outcome.pass = violations == 0;
    outcome.detail = violations == 0 ? note + "0 structural violations"
                                     : format("%d structural violations", violations);
    return outcome;
}

// ------------------------------------------------------------ criterion 7

int runCommand(const std::string& command) {
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Outcome pipelineDeterminism() {
    const fs::path base = "acceptance_determinism_scratch";
    fs::remove_all(base);
    fs::create_directories(base);

    SynthConfig synth;
    synth.highSubjects = 12;
    synth.lowSubjects = 12;
    synth.assignments = {"A1", "A2"};
    synth.meanLength = 30.0;
    synth.lengthSpread = 3.0;
    synth.seed = 11;
    const SynthDataset dataset = generateDataset(synth);
    writeTextFile((base / "events.csv").string(), dataset.eventsCsv);
    writeTextFile((base / "labels.csv").string(), dataset.labelsCsv);

    const std::string common = std::string("\"") + CDSM_CLI_PATH + "\" pipeline --events " +
                               (base / "events.csv").string() + " --labels " +
                               (base / "labels.csv").string() +
                               " --seed 5 --rounds 10 --trial 1 --out ";
    Outcome outcome;
    const int rc1 = runCommand(common + (base / "out1").string() + " > " +
                               (base / "log1.txt").string() + " 2>&1");
    const int rc2 = runCommand(common + (base / "out2").string() + " > " +
                               (base / "log2.txt").string() + " 2>&1");
    if (rc1 != 0 || rc2 != 0) {
        outcome.detail = format("pipeline runs exited %d and %d (need 0)", rc1, rc2);
        return outcome;
    }

    std::map<std::string, std::string> first;
    for (const auto& entry : fs::directory_iterator(base / "out1")) {
        first[entry.path().filename().string()] = slurp(entry.path());
    }
    std::size_t compared = 0;
    std::size_t different = 0;
    std::set<std::string> secondNames;
    for (const auto& entry : fs::directory_iterator(base / "out2")) {
        const std::string name = entry.path().filename().string();
        secondNames.insert(name);
        const auto found = first.find(name);
        if (found == first.end() || found->second != slurp(entry.path())) {
            ++different;
        }
        ++compared;
    }
    const bool sameNames = secondNames.size() == first.size() && compared == first.size();
    outcome.pass = sameNames && different == 0 && compared > 0;
    outcome.detail = format("%zu files compared, %zu differ (need 0)", compared, different);
    if (outcome.pass) fs::remove_all(base);
    return outcome;
}

// ------------------------------------------------------------ criterion 8

Outcome discretizationProperties() {
    std::mt19937 rng(808);
    const PatternClass classes[] = {PatternClass::FH, PatternClass::FL, PatternClass::DH,
                                    PatternClass::DL};
    int violations = 0;
    const int columns = 1000;
    for (int trial = 0; trial < columns; ++trial) {
        const std::size_t rows = 3 + rng() % 38;
        const PatternClass cls = classes[trial % 4];
        const bool threeBin = cls == PatternClass::DH || cls == PatternClass::DL;

        FeatureTable table;
        FeatureColumn column;
        column.name = "c";
        column.cls = cls;
        table.columns = {column};
        std::vector<double> values(rows);
        const bool integers = rng() % 2 == 0;
        for (std::size_t r = 0; r < rows; ++r) {
            values[r] = integers
                            ? static_cast<double>(rng() % 6)
                            : static_cast<double>(rng()) / static_cast<double>(rng.max());
            table.subjects.push_back("S" + std::to_string(r));
            table.values.push_back({values[r]});
        }

        const FeatureTable coded = discretize(table);
        const double median = interpolatedQuantile(values, 0.5);
        for (std::size_t i = 0; i < rows; ++i) {
            const double code = coded.values[i][0];
            if (threeBin) {
                if (code != 0.0 && code != 1.0 && code != 2.0) ++violations;
            } else {
                if (code != 0.0 && code != 1.0) ++violations;
                if ((values[i] < median) != (code == 0.0)) ++violations;
            }
            for (std::size_t j = 0; j < rows; ++j) {
                if (values[i] <= values[j] && code > coded.values[j][0]) ++violations;
            }
        }
    }
    Outcome outcome;
    outcome.pass = violations == 0;
    outcome.detail = format("%d columns checked, %d rule violations (need 0)", columns,
                            violations);
    return outcome;
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "mining matches brute-force enumeration", miningOracleEquivalence},
        {2, "tail probabilities and odds ratios", statisticsFidelity},
        {3, "planted-pattern recovery and null calibration", plantedRecovery},
        {4, "end-to-end M1 prediction beats majority", endToEndPrediction},
        {5, "boosting loss decay and best-stump equivalence", boostingProperties},
        {6, "cross-validation fold structure", foldStructure},
        {7, "pipeline byte-for-byte determinism", pipelineDeterminism},
        {8, "discretization binning rules", discretizationProperties},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        failures += outcome.pass ? 0 : 1;
        std::printf("%s  criterion %d (%s): %s\n", outcome.pass ? "PASS" : "FAIL",
                    criterion.number, criterion.name, outcome.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}

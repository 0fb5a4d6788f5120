#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdsm/event.hpp"
#include "cdsm/model.hpp"
#include "cdsm/seqmine.hpp"
#include "cdsm/statistics.hpp"

namespace cdsm {

struct PipelineConfig {
    std::string eventsPath;
    std::string labelsPath;
    std::string outDir;
    Scheme scheme = Scheme::General;
    MiningParams mining;
    ClassifyOptions classify;
    int boostingRounds = 50;
    std::uint64_t seed = 1;
    std::optional<int> trial;  // 1-based; all trials when unset
    double topFraction = 0.15;
    int threads = 1;
};

/// Course grade per subject: the mean of that subject's assignment grades.
std::map<std::string, double> finalGrades(
    const std::map<std::string, std::map<std::string, double>>& gradesBySubject);

/// Mines each group separately at the percentile support, unions the
/// pattern sets, gathers both groups' statistics, and classifies. The
/// returned list is sorted by pattern and carries every mined pattern,
/// discarded ones included.
std::vector<ClassifiedPattern> mineAndClassify(const std::vector<EventSequence>& highSeqs,
                                               const std::vector<EventSequence>& lowSeqs,
                                               const MiningParams& params,
                                               const ClassifyOptions& options, int threads = 1);

/// Assignment ids in labels-file column order: the course order that
/// trials truncate.
std::vector<std::string> assignmentOrder(const std::string& labelsCsv);

/// Whole-population mining: for each assignment in order, splits the
/// labeled subjects' sequences by performance group and mines them;
/// assignments where either group has no sequences contribute nothing.
std::vector<ClassifiedPattern> minePopulation(const std::vector<EventSequence>& sequences,
                                              const std::map<std::string, Label>& labels,
                                              const std::vector<std::string>& assignments,
                                              const MiningParams& params,
                                              const ClassifyOptions& options, int threads = 1);

struct TrialOutcome {
    int trialIndex = 1;
    std::vector<std::string> assignments;
    EvaluationResult cdsm;
    EvaluationResult majority;
    EvaluationResult expertRule;
    std::vector<std::string> warnings;
};

/// One trial's modified hold-out CV for the mined-pattern model and both
/// baselines. Everything fitted — mining, classification, discretization,
/// boosting — is re-fit per rotation on the train folds alone.
TrialOutcome runTrial(const std::vector<EventSequence>& sequences,
                      const std::map<std::string, std::map<std::string, double>>& grades,
                      const std::map<std::string, Label>& labels, const TrialConfig& config);

struct PipelineResult {
    std::map<std::string, Label> labels;
    std::vector<TrialOutcome> trials;
    std::vector<std::string> writtenFiles;
    std::string summaryText;  // per-trial metric grid, one row per model
};

/// The full batch pipeline: ingest, median-split labeling, per-trial CV
/// with baselines, and the pattern report, all written under
/// config.outDir.
PipelineResult runPipeline(const PipelineConfig& config);

}  // namespace cdsm

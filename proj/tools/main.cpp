// cdsm: batch command-line front-end for the differential sequence
// mining pipeline. Subcommands mirror the pipeline stages so that
// running them manually, in order, reproduces `cdsm pipeline` output
// byte for byte.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdsm/errors.hpp"
#include "cdsm/event.hpp"
#include "cdsm/features.hpp"
#include "cdsm/ingest.hpp"
#include "cdsm/model.hpp"
#include "cdsm/pipeline.hpp"
#include "cdsm/report.hpp"
#include "cdsm/seqmine.hpp"
#include "cdsm/serialize.hpp"
#include "cdsm/statistics.hpp"
#include "cdsm/synth.hpp"

namespace {

using namespace cdsm;

Scheme parseSchemeFlag(const std::string& value) {
    if (value == "general") return Scheme::General;
    if (value == "contextual") return Scheme::Contextual;
    throw ValidationError("--scheme must be 'general' or 'contextual'");
}

void checkMining(const MiningParams& params) {
    if (!(params.minPercentileSupport > 0.0) || params.minPercentileSupport > 1.0) {
        throw ValidationError("--min-support must be in (0, 1]");
    }
    if (params.maxGap < 0) throw ValidationError("--max-gap must be >= 0");
    if (params.maxLength < 1) throw ValidationError("--max-length must be >= 1");
}

void checkAlpha(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw ValidationError("--alpha must be in (0, 1)");
}

void checkRounds(int rounds) {
    if (rounds < 1) throw ValidationError("--rounds must be >= 1");
}

void checkThreads(int threads) {
    if (threads < 1) throw ValidationError("--threads must be >= 1");
}

void checkTopFraction(double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ValidationError("--top-fraction must be in (0, 1]");
    }
}

std::string trimmed(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

/// Merges a flat key=value file into a subcommand's options. Keys name the
/// subcommand's long flags without the leading dashes; values go through the
/// same conversion as command-line arguments. Flags given explicitly on the
/// command line keep their values.
void applyConfigFile(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    std::istringstream lines(readTextFile(path));
    std::string line;
    int lineNo = 0;
    while (std::getline(lines, line)) {
        ++lineNo;
        const std::string entry = trimmed(line);
        if (entry.empty() || entry.front() == '#' || entry.front() == ';') continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw FormatError("config file: line " + std::to_string(lineNo) +
                              ": expected key=value");
        }
        const std::string key = trimmed(entry.substr(0, eq));
        const std::string value = trimmed(entry.substr(eq + 1));
        CLI::Option* option = key.empty() ? nullptr : cmd->get_option_no_throw("--" + key);
        if (option == nullptr || key == "config") {
            throw ValidationError("config file: unknown key \"" + key + "\"");
        }
        if (option->count() > 0) continue;  // an explicit flag wins
        option->add_result(value);
        option->run_callback();
    }
}

std::map<std::string, Label> labelsFromGrades(const std::string& labelsCsv) {
    return medianSplit(finalGrades(gradesFromCsv(labelsCsv)));
}

std::vector<std::string> sortedSubjects(const std::map<std::string, Label>& labels) {
    std::vector<std::string> subjects;
    subjects.reserve(labels.size());
    for (const auto& [subject, label] : labels) subjects.push_back(subject);
    return subjects;
}

void countGroups(const std::map<std::string, Label>& labels, std::size_t& high,
                 std::size_t& low) {
    high = 0;
    low = 0;
    for (const auto& [subject, label] : labels) {
        (label == Label::High ? high : low) += 1;
    }
}

void writeInto(const std::string& dir, const std::string& name, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory \"" + dir + "\"");
    writeTextFile((fs::path(dir) / name).string(), content);
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
    std::string events;
    std::string scheme = "general";
    std::string out;
    std::string config;
};

void runIngest(const IngestArgs& args) {
    const std::vector<RawEvent> raw = parseProgSnap2(readTextFile(args.events));
    const CategorizeResult categorized = categorize(raw, parseSchemeFlag(args.scheme));
    writeTextFile(args.out, sequencesToJsonl(categorized.sequences));
    std::cout << "wrote " << args.out << ": " << categorized.sequences.size() << " sequences, "
              << categorized.summary.mappedEvents << "/" << categorized.summary.totalEvents
              << " events mapped\n";
}

// ------------------------------------------------------------------ mine

struct MineArgs {
    std::string sequences;
    std::string labels;
    MiningParams mining;
    double alpha = 0.05;
    int threads = 1;
    std::string out;
    std::string config;
};

void runMine(const MineArgs& args) {
    checkMining(args.mining);
    checkAlpha(args.alpha);
    checkThreads(args.threads);
    const std::vector<EventSequence> sequences = sequencesFromJsonl(readTextFile(args.sequences));
    const std::string labelsCsv = readTextFile(args.labels);
    const std::map<std::string, Label> labels = labelsFromGrades(labelsCsv);
    ClassifyOptions options;
    options.alpha = args.alpha;
    const std::vector<ClassifiedPattern> classified = minePopulation(
        sequences, labels, assignmentOrder(labelsCsv), args.mining, options, args.threads);
    std::size_t high = 0;
    std::size_t low = 0;
    countGroups(labels, high, low);
    writeTextFile(args.out, patternsToJson(classified, high, low, args.mining.maxGap));

    std::map<std::string, std::size_t> byClass;
    for (const ClassifiedPattern& pattern : classified) {
        byClass[toString(pattern.classification.label)] += 1;
    }
    std::cout << "wrote " << args.out << ": " << classified.size() << " patterns";
    for (const auto& [label, count] : byClass) std::cout << " " << label << "=" << count;
    std::cout << "\n";
}

// -------------------------------------------------------------- featurize

struct FeaturizeArgs {
    std::string sequences;
    std::string patterns;
    std::string labels;
    int threads = 1;
    std::string out;
    std::string config;
};

void runFeaturize(const FeaturizeArgs& args) {
    checkThreads(args.threads);
    const std::vector<EventSequence> sequences = sequencesFromJsonl(readTextFile(args.sequences));
    const PatternsFile file = patternsFromJson(readTextFile(args.patterns));
    const std::map<std::string, Label> labels = labelsFromGrades(readTextFile(args.labels));
    const FeatureTable table = buildFeatureTable(file.patterns, sequences,
                                                 sortedSubjects(labels), file.maxGap,
                                                 args.threads);
    writeTextFile(args.out, featuresToCsv(table));
    std::cout << "wrote " << args.out << ": " << table.subjects.size() << " subjects x "
              << table.columnCount() << " features\n";
}

// ------------------------------------------------------------------ train

struct TrainArgs {
    std::string features;
    std::string labels;
    int rounds = 50;
    std::string out;
    std::string config;
};

void runTrain(const TrainArgs& args) {
    checkRounds(args.rounds);
    const FeatureTable table = featuresFromCsv(readTextFile(args.features));
    const std::map<std::string, Label> labels = labelsFromGrades(readTextFile(args.labels));
    std::vector<Label> labelVec;
    labelVec.reserve(table.subjects.size());
    for (const std::string& subject : table.subjects) {
        const auto found = labels.find(subject);
        if (found == labels.end()) {
            throw ValidationError("subject \"" + subject + "\" has no grade row");
        }
        labelVec.push_back(found->second);
    }
    TrainedModel model;
    model.discretizer = fitDiscretizer(table);
    model.stumps =
        trainAdaBoost(applyDiscretizer(model.discretizer, table), labelVec, args.rounds);
    writeTextFile(args.out, modelToJson(model));
    std::cout << "wrote " << args.out << ": " << model.stumps.rounds.size() << " rounds\n";
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string sequences;
    std::string labels;
    MiningParams mining;
    double alpha = 0.05;
    int rounds = 50;
    std::uint64_t seed = 1;
    int trial = 0;  // 0: all trials
    int threads = 1;
    std::string out;
    std::string config;
};

void runEvaluate(const EvaluateArgs& args) {
    checkMining(args.mining);
    checkAlpha(args.alpha);
    checkRounds(args.rounds);
    checkThreads(args.threads);
    const std::vector<EventSequence> sequences = sequencesFromJsonl(readTextFile(args.sequences));
    const std::string labelsCsv = readTextFile(args.labels);
    const auto grades = gradesFromCsv(labelsCsv);
    const std::map<std::string, Label> labels = medianSplit(finalGrades(grades));
    const std::vector<std::string> assignments = assignmentOrder(labelsCsv);

    std::vector<int> trials;
    if (args.trial != 0) {
        if (args.trial < 1 || args.trial > static_cast<int>(assignments.size())) {
            throw ValidationError("--trial out of range: " + std::to_string(args.trial));
        }
        trials.push_back(args.trial);
    } else {
        for (int i = 1; i <= static_cast<int>(assignments.size()); ++i) trials.push_back(i);
    }

    for (int index : trials) {
        TrialConfig config;
        config.trialIndex = index;
        config.assignments.assign(assignments.begin(), assignments.begin() + index);
        config.mining = args.mining;
        config.classify.alpha = args.alpha;
        config.boostingRounds = args.rounds;
        config.seed = args.seed;
        config.threads = args.threads;
        const TrialOutcome outcome = runTrial(sequences, grades, labels, config);
        const std::string prefix = "trial_M" + std::to_string(index) + "_";
        writeInto(args.out, prefix + "cdsm.json", evaluationToJson(outcome.cdsm));
        writeInto(args.out, prefix + "majority.json", evaluationToJson(outcome.majority));
        writeInto(args.out, prefix + "expert.json", evaluationToJson(outcome.expertRule));
        char line[160];
        std::snprintf(line, sizeof(line),
                      "M%d cdsm=%.3f majority=%.3f expert=%.3f (accuracy)\n", index,
                      outcome.cdsm.aggregate.accuracy, outcome.majority.aggregate.accuracy,
                      outcome.expertRule.aggregate.accuracy);
        std::cout << line;
        for (const std::string& warning : outcome.warnings) {
            std::cerr << "warning: " << warning << "\n";
        }
    }
}

// ----------------------------------------------------------------- report

struct ReportArgs {
    std::string patterns;
    double topFraction = 0.15;
    std::string out;
    std::string config;
};

void runReport(const ReportArgs& args) {
    checkTopFraction(args.topFraction);
    const PatternsFile file = patternsFromJson(readTextFile(args.patterns));
    const std::vector<PatternReportRow> rows =
        buildPatternReport(file.patterns, file.highCount, file.lowCount, file.maxGap);
    const std::vector<std::size_t> selected = selectTopFraction(rows, args.topFraction);
    writeInto(args.out, "report.json",
              reportToJson(rows, selected, file.highCount, file.lowCount, args.topFraction));
    writeInto(args.out, "report.txt", renderReportText(rows, selected));
    std::cout << "wrote " << args.out << "/report.json and report.txt: " << rows.size()
              << " rows, " << selected.size() << " selected\n";
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
    std::string out;
    std::uint64_t seed = 1;
    int highSubjects = 53;
    int lowSubjects = 53;
    double meanLength = 500.0;
    bool nullModel = false;
    std::string config;
};

void runSynth(const SynthArgs& args) {
    if (args.highSubjects < 1 || args.lowSubjects < 1) {
        throw ValidationError("--high-subjects and --low-subjects must be >= 1");
    }
    if (args.meanLength < 1.0) throw ValidationError("--mean-length must be >= 1");
    SynthConfig config = args.nullModel ? SynthConfig::nullCalibration() : SynthConfig{};
    config.seed = args.seed;
    config.highSubjects = args.highSubjects;
    config.lowSubjects = args.lowSubjects;
    if (!args.nullModel) config.meanLength = args.meanLength;
    const SynthDataset dataset = generateDataset(config);
    writeInto(args.out, "events.csv", dataset.eventsCsv);
    writeInto(args.out, "labels.csv", dataset.labelsCsv);
    writeInto(args.out, "manifest.json", dataset.manifestJson);
    std::cout << "wrote " << args.out << ": events.csv labels.csv manifest.json (seed "
              << args.seed << ")\n";
}

// --------------------------------------------------------------- pipeline

struct PipelineArgs {
    std::string events;
    std::string labels;
    std::string out;
    std::string scheme = "general";
    MiningParams mining;
    double alpha = 0.05;
    int rounds = 50;
    std::uint64_t seed = 1;
    int trial = 0;  // 0: all trials
    double topFraction = 0.15;
    int threads = 1;
    std::string config;
};

void runPipelineCommand(const PipelineArgs& args) {
    checkMining(args.mining);
    checkAlpha(args.alpha);
    checkRounds(args.rounds);
    checkThreads(args.threads);
    checkTopFraction(args.topFraction);
    PipelineConfig config;
    config.eventsPath = args.events;
    config.labelsPath = args.labels;
    config.outDir = args.out;
    config.scheme = parseSchemeFlag(args.scheme);
    config.mining = args.mining;
    config.classify.alpha = args.alpha;
    config.boostingRounds = args.rounds;
    config.seed = args.seed;
    if (args.trial != 0) config.trial = args.trial;
    config.topFraction = args.topFraction;
    config.threads = args.threads;
    const PipelineResult result = runPipeline(config);
    std::cout << result.summaryText;
    for (const TrialOutcome& trial : result.trials) {
        for (const std::string& warning : trial.warnings) {
            std::cerr << "warning: " << warning << "\n";
        }
    }
}

// ------------------------------------------------------------ app wiring

void addMiningFlags(CLI::App* cmd, MiningParams& params) {
    cmd->add_option("--min-support", params.minPercentileSupport,
                    "Per-group percentile support threshold in (0, 1]")
        ->capture_default_str();
    cmd->add_option("--max-gap", params.maxGap, "Largest gap allowed between matched events")
        ->capture_default_str();
    cmd->add_option("--max-length", params.maxLength, "Longest pattern mined")
        ->capture_default_str();
}

void addConfigFlag(CLI::App* cmd, std::string& path) {
    cmd->add_option("--config", path, "Flat key=value config file; flags override it");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differential sequence mining over programming process logs"};
    app.require_subcommand(1);

    IngestArgs ingestArgs;
    CLI::App* ingest = app.add_subcommand(
        "ingest", "Parse an event CSV into categorized, run-collapsed sequences (JSONL)");
    ingest->add_option("--events", ingestArgs.events, "Event table CSV")->required();
    ingest->add_option("--scheme", ingestArgs.scheme, "Categorization scheme: general|contextual")
        ->capture_default_str();
    ingest->add_option("--out", ingestArgs.out, "Output sequences JSONL path")->required();
    addConfigFlag(ingest, ingestArgs.config);
    ingest->callback([&ingestArgs, ingest] {
        applyConfigFile(ingest, ingestArgs.config);
        runIngest(ingestArgs);
    });

    MineArgs mineArgs;
    CLI::App* mine = app.add_subcommand(
        "mine", "Mine and statistically classify patterns per assignment (JSON)");
    mine->add_option("--sequences", mineArgs.sequences, "Sequences JSONL from ingest")->required();
    mine->add_option("--labels", mineArgs.labels, "Grades CSV (SubjectID + one column per assignment)")
        ->required();
    addMiningFlags(mine, mineArgs.mining);
    mine->add_option("--alpha", mineArgs.alpha, "Significance level for both test layers")
        ->capture_default_str();
    mine->add_option("--threads", mineArgs.threads, "Worker thread cap")->capture_default_str();
    mine->add_option("--out", mineArgs.out, "Output patterns JSON path")->required();
    addConfigFlag(mine, mineArgs.config);
    mine->callback([&mineArgs, mine] {
        applyConfigFile(mine, mineArgs.config);
        runMine(mineArgs);
    });

    FeaturizeArgs featurizeArgs;
    CLI::App* featurize = app.add_subcommand(
        "featurize", "Count pattern instance supports into a per-subject feature CSV");
    featurize->add_option("--sequences", featurizeArgs.sequences, "Sequences JSONL")->required();
    featurize->add_option("--patterns", featurizeArgs.patterns, "Patterns JSON from mine")
        ->required();
    featurize->add_option("--labels", featurizeArgs.labels, "Grades CSV (defines the subject set)")
        ->required();
    featurize->add_option("--threads", featurizeArgs.threads, "Worker thread cap")
        ->capture_default_str();
    featurize->add_option("--out", featurizeArgs.out, "Output features CSV path")->required();
    addConfigFlag(featurize, featurizeArgs.config);
    featurize->callback([&featurizeArgs, featurize] {
        applyConfigFile(featurize, featurizeArgs.config);
        runFeaturize(featurizeArgs);
    });

    TrainArgs trainArgs;
    CLI::App* train = app.add_subcommand(
        "train", "Fit discretization and the boosted-stump classifier (JSON)");
    train->add_option("--features", trainArgs.features, "Features CSV from featurize")->required();
    train->add_option("--labels", trainArgs.labels, "Grades CSV")->required();
    train->add_option("--rounds", trainArgs.rounds, "Boosting rounds")->capture_default_str();
    train->add_option("--out", trainArgs.out, "Output model JSON path")->required();
    addConfigFlag(train, trainArgs.config);
    train->callback([&trainArgs, train] {
        applyConfigFile(train, trainArgs.config);
        runTrain(trainArgs);
    });

    EvaluateArgs evaluateArgs;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Run the modified hold-out cross-validation with baselines");
    evaluate->add_option("--sequences", evaluateArgs.sequences, "Sequences JSONL")->required();
    evaluate->add_option("--labels", evaluateArgs.labels, "Grades CSV")->required();
    addMiningFlags(evaluate, evaluateArgs.mining);
    evaluate->add_option("--alpha", evaluateArgs.alpha, "Significance level")
        ->capture_default_str();
    evaluate->add_option("--rounds", evaluateArgs.rounds, "Boosting rounds")
        ->capture_default_str();
    evaluate->add_option("--seed", evaluateArgs.seed, "Fold-shuffle seed")->capture_default_str();
    evaluate->add_option("--trial", evaluateArgs.trial,
                         "Trial index (first N assignments); 0 runs every trial")
        ->capture_default_str();
    evaluate->add_option("--threads", evaluateArgs.threads, "Worker thread cap")
        ->capture_default_str();
    evaluate->add_option("--out", evaluateArgs.out, "Output directory for evaluation JSON files")
        ->required();
    addConfigFlag(evaluate, evaluateArgs.config);
    evaluate->callback([&evaluateArgs, evaluate] {
        applyConfigFile(evaluate, evaluateArgs.config);
        runEvaluate(evaluateArgs);
    });

    ReportArgs reportArgs;
    CLI::App* report = app.add_subcommand(
        "report", "Rank classified patterns and select the top fraction per direction");
    report->add_option("--patterns", reportArgs.patterns, "Patterns JSON from mine")->required();
    report->add_option("--top-fraction", reportArgs.topFraction,
                       "Fraction of patterns selected per direction")
        ->capture_default_str();
    report->add_option("--out", reportArgs.out, "Output directory for report.json / report.txt")
        ->required();
    addConfigFlag(report, reportArgs.config);
    report->callback([&reportArgs, report] {
        applyConfigFile(report, reportArgs.config);
        runReport(reportArgs);
    });

    SynthArgs synthArgs;
    CLI::App* synth = app.add_subcommand(
        "synth", "Generate a synthetic event log with planted differential patterns");
    synth->add_option("--out", synthArgs.out, "Output directory")->required();
    synth->add_option("--seed", synthArgs.seed, "Generator seed")->capture_default_str();
    synth->add_option("--high-subjects", synthArgs.highSubjects, "High-group size")
        ->capture_default_str();
    synth->add_option("--low-subjects", synthArgs.lowSubjects, "Low-group size")
        ->capture_default_str();
    synth->add_option("--mean-length", synthArgs.meanLength, "Mean sequence length")
        ->capture_default_str();
    synth->add_flag("--null", synthArgs.nullModel,
                    "Plant nothing: background-only calibration dataset");
    addConfigFlag(synth, synthArgs.config);
    synth->callback([&synthArgs, synth] {
        applyConfigFile(synth, synthArgs.config);
        runSynth(synthArgs);
    });

    PipelineArgs pipelineArgs;
    CLI::App* pipeline = app.add_subcommand(
        "pipeline", "Run every stage for trials M1..MK and print the summary grid");
    pipeline->add_option("--events", pipelineArgs.events, "Event table CSV")->required();
    pipeline->add_option("--labels", pipelineArgs.labels, "Grades CSV")->required();
    pipeline->add_option("--out", pipelineArgs.out, "Output directory")->required();
    pipeline->add_option("--scheme", pipelineArgs.scheme, "general|contextual")
        ->capture_default_str();
    addMiningFlags(pipeline, pipelineArgs.mining);
    pipeline->add_option("--alpha", pipelineArgs.alpha, "Significance level")
        ->capture_default_str();
    pipeline->add_option("--rounds", pipelineArgs.rounds, "Boosting rounds")
        ->capture_default_str();
    pipeline->add_option("--seed", pipelineArgs.seed, "Fold-shuffle seed")
        ->capture_default_str();
    pipeline->add_option("--trial", pipelineArgs.trial, "Single trial index; 0 runs every trial")
        ->capture_default_str();
    pipeline->add_option("--top-fraction", pipelineArgs.topFraction, "Report selection fraction")
        ->capture_default_str();
    pipeline->add_option("--threads", pipelineArgs.threads, "Worker thread cap")
        ->capture_default_str();
    addConfigFlag(pipeline, pipelineArgs.config);
    pipeline->callback([&pipelineArgs, pipeline] {
        applyConfigFile(pipeline, pipelineArgs.config);
        runPipelineCommand(pipelineArgs);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

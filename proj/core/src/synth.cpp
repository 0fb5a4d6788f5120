#include "cdsm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdsm/csv.hpp"
#include "cdsm/errors.hpp"
#include "cdsm/rng.hpp"

#include <json.hpp>

namespace cdsm {

std::vector<PlantSpec> SynthConfig::defaultPlants() {
    using B = BaseEvent;
    const auto pattern = [](std::initializer_list<B> bases) {
        Pattern p;
        for (B base : bases) p.events.push_back(EventType{base, {}});
        return p;
    };
    // Plants are built from the rarest background symbols so that chance
    // embeddings in ~500-event sequences stay negligible; otherwise the
    // background would wash out the planted containment gap. The two
    // containment plants use disjoint symbol pairs, and the copy-rate
    // plants interleave RUN so that no plant embeds inside another's
    // copies.
    std::vector<PlantSpec> plants;
    plants.push_back({pattern({B::Var, B::Chan, B::Var, B::Chan, B::Var, B::Chan}), 0.8, 0.2,
                      1.0, 1.0, PatternClass::FH});
    plants.push_back({pattern({B::EditPst, B::File, B::EditPst, B::File, B::EditPst, B::File}),
                      0.2, 0.8, 1.0, 1.0, PatternClass::FL});
    // Equal containment with unequal copy rates exercises the
    // occurrence-rate layer.
    plants.push_back({pattern({B::Chan, B::Run, B::Var, B::Run, B::Chan, B::Var}), 1.0, 1.0,
                      5.0, 1.0, PatternClass::DH});
    plants.push_back({pattern({B::File, B::Run, B::EditPst, B::Run, B::File, B::EditPst}), 1.0,
                      1.0, 1.0, 5.0, PatternClass::DL});
    return plants;
}

SynthConfig SynthConfig::nullCalibration() {
    // Calibrated so that, with no plants, whole-population mining at the
    // default parameters classifies nothing in >= 90% of seeds. With
    // dozens of mined patterns each tested at alpha 0.05, a rich null
    // background trips the familywise rate far above that bar, and any
    // pattern whose prevalence sits near the support threshold is only
    // mined after an upward fluctuation, which biases its test. The null
    // model therefore polarizes: two event types at full sequence length
    // make every minable pattern present in all sequences of both groups
    // (the containment layer is structurally degenerate), while all
    // instance counts are near-affine in the collapsed sequence length,
    // so the whole family reduces to about one effective group
    // comparison per dataset.
    SynthConfig config;
    config.highSubjects = 50;
    config.lowSubjects = 50;
    config.assignments = {"A1"};
    config.meanLength = 500.0;
    config.lengthSpread = 50.0;
    config.backgroundWeights = {1, 0, 0, 0, 1, 0, 0, 0};
    config.plants.clear();
    return config;
}

namespace {

struct PendingEvent {
    BaseEvent base;
    std::string category;  // CHAN events only
    int plantIndex = -1;   // -1 marks background
};

/// Atomic build unit: a single background event or one whole plant copy.
struct Block {
    std::vector<PendingEvent> events;
    int plantIndex = -1;
};

const char* eventKindFor(BaseEvent base) {
    switch (base) {
        case BaseEvent::Edit:
        case BaseEvent::EditIns:
        case BaseEvent::EditDel:
        case BaseEvent::EditPst: return "File.Edit";
        case BaseEvent::Run: return "Run.Program";
        case BaseEvent::File: return "File.Save";
        case BaseEvent::Chan: return "X-ChangeBlockCategory";
        case BaseEvent::Var: return "X-AddVariable";
    }
    return "File.Edit";
}

const char* editSubtypeFor(BaseEvent base) {
    switch (base) {
        case BaseEvent::EditIns: return "Insert";
        case BaseEvent::EditDel: return "Delete";
        case BaseEvent::EditPst: return "Paste";
        default: return "";
    }
}

void validate(const SynthConfig& config, const std::vector<PlantSpec>& plants) {
    if (config.highSubjects < 1 || config.lowSubjects < 1) {
        throw ValidationError("generateDataset: each group needs at least one subject");
    }
    if (config.assignments.empty()) {
        throw ValidationError("generateDataset: at least one assignment required");
    }
    if (config.meanLength < 1.0) {
        throw ValidationError("generateDataset: mean sequence length must be >= 1");
    }
    if (config.lengthSpread < 0.0) {
        throw ValidationError("generateDataset: length spread must be >= 0");
    }
    double weightSum = 0.0;
    for (double w : config.backgroundWeights) {
        if (w < 0.0) throw ValidationError("generateDataset: negative background weight");
        weightSum += w;
    }
    if (weightSum <= 0.0) {
        throw ValidationError("generateDataset: background weights sum to zero");
    }
    if (config.categoryNames.empty()) {
        throw ValidationError("generateDataset: category name list is empty");
    }
    if (config.gradeLowMin > config.gradeLowMax || config.gradeHighMin > config.gradeHighMax) {
        throw ValidationError("generateDataset: malformed grade range");
    }
    if (config.gradeLowMax >= config.gradeHighMin) {
        throw ValidationError("generateDataset: grade ranges must be disjoint (low below high)");
    }
    for (const PlantSpec& plant : plants) {
        if (plant.pattern.events.empty()) {
            throw ValidationError("generateDataset: empty plant pattern");
        }
        if (static_cast<double>(plant.pattern.size()) > config.meanLength) {
            throw ValidationError("generateDataset: plant pattern longer than base sequence length");
        }
        if (plant.containHigh < 0.0 || plant.containHigh > 1.0 || plant.containLow < 0.0 ||
            plant.containLow > 1.0) {
            throw ValidationError("generateDataset: containment probability outside [0, 1]");
        }
        if (plant.meanCopiesHigh < 0.0 || plant.meanCopiesLow < 0.0) {
            throw ValidationError("generateDataset: negative copy rate");
        }
        for (const EventType& event : plant.pattern.events) {
            if (!event.context.empty()) {
                throw ValidationError(
                    "generateDataset: plant patterns must use base event types");
            }
        }
        for (std::size_t i = 1; i < plant.pattern.events.size(); ++i) {
            if (plant.pattern.events[i] == plant.pattern.events[i - 1]) {
                throw ValidationError(
                    "generateDataset: plant pattern has adjacent duplicate events (would not "
                    "survive run collapsing)");
            }
        }
    }
}

}  // namespace

SynthDataset generateDataset(const SynthConfig& config) {
    const std::vector<PlantSpec>& plants = config.plants;
    validate(config, plants);

    DeterministicRng rng(config.seed);
    const std::vector<double> weights(config.backgroundWeights.begin(),
                                      config.backgroundWeights.end());

    const int totalSubjects = config.highSubjects + config.lowSubjects;
    int idWidth = 1;
    for (int v = totalSubjects; v >= 10; v /= 10) ++idWidth;
    const auto subjectId = [&](int index) {
        std::string digits = std::to_string(index + 1);
        return "S" + std::string(static_cast<std::size_t>(idWidth) - digits.size(), '0') + digits;
    };

    std::string events;
    writeCsvRow(events, {"SubjectID", "AssignmentID", "Order", "EventType", "ClientTimestamp",
                         "EditType", "CategoryName", "NodeCount"});
    std::string labels;
    {
        std::vector<std::string> header = {"SubjectID"};
        header.insert(header.end(), config.assignments.begin(), config.assignments.end());
        writeCsvRow(labels, header);
    }

    nlohmann::json manifestSubjects = nlohmann::json::array();
    nlohmann::json manifestCopies = nlohmann::json::array();

    std::size_t maxPlantLength = 0;
    for (const PlantSpec& plant : plants) {
        maxPlantLength = std::max(maxPlantLength, plant.pattern.size());
    }

    for (int s = 0; s < totalSubjects; ++s) {
        const bool isHigh = s < config.highSubjects;
        const std::string subject = subjectId(s);

        std::vector<double> grades;
        for (std::size_t a = 0; a < config.assignments.size(); ++a) {
            const std::string& assignment = config.assignments[a];

            const double drawn = rng.normal(config.meanLength, config.lengthSpread);
            const std::size_t length = static_cast<std::size_t>(std::max(
                {1.0, static_cast<double>(maxPlantLength), std::round(drawn)}));

            // Background events, one block each.
            std::vector<Block> blocks;
            blocks.reserve(length + 4);
            for (std::size_t i = 0; i < length; ++i) {
                PendingEvent event;
                event.base = kAllBaseEvents[rng.categorical(weights)];
                if (event.base == BaseEvent::Chan) {
                    event.category = config.categoryNames[rng.below(config.categoryNames.size())];
                }
                blocks.push_back(Block{{event}, -1});
            }

            // Plant copies as atomic blocks so later insertions can never
            // split an earlier copy.
            for (std::size_t p = 0; p < plants.size(); ++p) {
                const PlantSpec& plant = plants[p];
                const double containProb = isHigh ? plant.containHigh : plant.containLow;
                if (rng.uniform01() >= containProb) continue;
                const double meanCopies = isHigh ? plant.meanCopiesHigh : plant.meanCopiesLow;
                const std::int64_t copies = std::max<std::int64_t>(1, rng.poisson(meanCopies));
                for (std::int64_t copy = 0; copy < copies; ++copy) {
                    Block block;
                    block.plantIndex = static_cast<int>(p);
                    for (const EventType& event : plant.pattern.events) {
                        PendingEvent pending;
                        pending.base = event.base;
                        pending.plantIndex = static_cast<int>(p);
                        if (pending.base == BaseEvent::Chan) {
                            pending.category =
                                config.categoryNames[rng.below(config.categoryNames.size())];
                        }
                        block.events.push_back(std::move(pending));
                    }
                    const std::size_t pos = rng.below(blocks.size() + 1);
                    blocks.insert(blocks.begin() + static_cast<std::ptrdiff_t>(pos),
                                  std::move(block));
                }
            }

            // Flatten, assigning orders, timestamps, and the node metric.
            std::int64_t timestamp =
                1600000000000 +
                (static_cast<std::int64_t>(s) * static_cast<std::int64_t>(
                                                    config.assignments.size()) +
                 static_cast<std::int64_t>(a)) *
                    86400000;
            std::int64_t node = 0;
            std::int64_t order = 0;
            std::vector<nlohmann::json> plantStarts(plants.size(), nlohmann::json::array());
            for (const Block& block : blocks) {
                if (block.plantIndex >= 0) {
                    plantStarts[static_cast<std::size_t>(block.plantIndex)].push_back(order);
                }
                for (const PendingEvent& event : block.events) {
                    timestamp += 1 + static_cast<std::int64_t>(
                                         rng.uniform01() * 2.0 *
                                         config.meanSecondsBetweenEvents * 1000.0);
                    node = std::max<std::int64_t>(0, node + static_cast<std::int64_t>(
                                                                rng.below(4)) -
                                                         1);
                    writeCsvRow(events,
                                {subject, assignment, std::to_string(order),
                                 eventKindFor(event.base), std::to_string(timestamp),
                                 editSubtypeFor(event.base), event.category,
                                 std::to_string(node)});
                    ++order;
                }
            }
            for (std::size_t p = 0; p < plants.size(); ++p) {
                if (plantStarts[p].empty()) continue;
                manifestCopies.push_back({{"subject", subject},
                                          {"assignment", assignment},
                                          {"plant", p},
                                          {"start_orders", plantStarts[p]}});
            }

            const double lo = isHigh ? config.gradeHighMin : config.gradeLowMin;
            const double hi = isHigh ? config.gradeHighMax : config.gradeLowMax;
            grades.push_back(lo + rng.uniform01() * (hi - lo));
        }

        std::vector<std::string> row = {subject};
        for (double grade : grades) {
            char buffer[32];
            std::snprintf(buffer, sizeof(buffer), "%.6f", grade);
            row.push_back(buffer);
        }
        writeCsvRow(labels, row);
        manifestSubjects.push_back({{"id", subject}, {"group", isHigh ? "HIGH" : "LOW"}});
    }

    nlohmann::json manifestPlants = nlohmann::json::array();
    for (const PlantSpec& plant : plants) {
        manifestPlants.push_back({{"pattern", toString(plant.pattern)},
                                  {"expected_class", toString(plant.expectedClass)},
                                  {"contain_high", plant.containHigh},
                                  {"contain_low", plant.containLow},
                                  {"mean_copies_high", plant.meanCopiesHigh},
                                  {"mean_copies_low", plant.meanCopiesLow}});
    }
    nlohmann::json manifest = {
        {"seed", config.seed},
        {"high_subjects", config.highSubjects},
        {"low_subjects", config.lowSubjects},
        {"assignments", config.assignments},
        {"mean_length", config.meanLength},
        {"length_spread", config.lengthSpread},
        {"plants", manifestPlants},
        {"subjects", manifestSubjects},
        {"planted_copies", manifestCopies},
    };

    SynthDataset dataset;
    dataset.eventsCsv = std::move(events);
    dataset.labelsCsv = std::move(labels);
    dataset.manifestJson = manifest.dump(2) + "\n";
    return dataset;
}

}  // namespace cdsm

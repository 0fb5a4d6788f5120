#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cdsm/errors.hpp"
#include "cdsm/ingest.hpp"
#include "cdsm/model.hpp"
#include "cdsm/pipeline.hpp"
#include "cdsm/serialize.hpp"
#include "cdsm/synth.hpp"

using namespace cdsm;

namespace {

/// Small, fast configuration with the two containment plants only.
SynthConfig smallConfig() {
    SynthConfig config;
    config.highSubjects = 40;
    config.lowSubjects = 40;
    config.assignments = {"A1"};
    config.meanLength = 60.0;
    config.lengthSpread = 5.0;
    const std::vector<PlantSpec> all = SynthConfig::defaultPlants();
    config.plants = {all[0], all[1]};
    config.seed = 7;
    return config;
}

std::set<std::string> groupSubjects(const std::string& manifestJson, const std::string& group) {
    const nlohmann::json manifest = nlohmann::json::parse(manifestJson);
    std::set<std::string> out;
    for (const auto& subject : manifest.at("subjects")) {
        if (subject.at("group").get<std::string>() == group) {
            out.insert(subject.at("id").get<std::string>());
        }
    }
    return out;
}

double containmentRate(const std::vector<EventSequence>& sequences,
                       const std::set<std::string>& subjects, const Pattern& pattern) {
    int containing = 0;
    int total = 0;
    for (const EventSequence& seq : sequences) {
        if (!subjects.count(seq.subjectId)) continue;
        ++total;
        containing += containsPattern(pattern, seq.events, 1) ? 1 : 0;
    }
    REQUIRE(total > 0);
    return static_cast<double>(containing) / static_cast<double>(total);
}

}  // namespace

TEST_SUITE("synth") {
    TEST_CASE("generation is deterministic for a seed and distinct across seeds") {
        SynthConfig config = smallConfig();
        const SynthDataset first = generateDataset(config);
        const SynthDataset second = generateDataset(config);
        CHECK(first.eventsCsv == second.eventsCsv);
        CHECK(first.labelsCsv == second.labelsCsv);
        CHECK(first.manifestJson == second.manifestJson);

        config.seed = 8;
        const SynthDataset other = generateDataset(config);
        CHECK(first.eventsCsv != other.eventsCsv);
    }

    TEST_CASE("generated tables round-trip through ingestion without drops") {
        const SynthConfig config = smallConfig();
        const SynthDataset dataset = generateDataset(config);

        const std::vector<RawEvent> raw = parseProgSnap2(dataset.eventsCsv);
        const CategorizeResult result = categorize(raw, Scheme::General);

        CHECK(result.summary.totalEvents == raw.size());
        CHECK(result.summary.mappedEvents == raw.size());
        CHECK(result.summary.droppedByKind.empty());
        CHECK(result.summary.timestampsPresent);
        CHECK(result.sequences.size() ==
              static_cast<std::size_t>(config.highSubjects + config.lowSubjects));

        // Timestamps are strictly increasing inside each (subject, assignment).
        std::map<std::pair<std::string, std::string>, std::int64_t> lastSeen;
        for (const RawEvent& event : raw) {
            REQUIRE(event.timestampMs.has_value());
            const auto key = std::make_pair(event.subjectId, event.assignmentId);
            const auto it = lastSeen.find(key);
            if (it != lastSeen.end()) CHECK(*event.timestampMs > it->second);
            lastSeen[key] = *event.timestampMs;
        }
    }

    TEST_CASE("containment plants hit their target rates in each group") {
        const SynthConfig config = smallConfig();
        const SynthDataset dataset = generateDataset(config);
        const CategorizeResult result =
            categorize(parseProgSnap2(dataset.eventsCsv), Scheme::General);
        const std::set<std::string> high = groupSubjects(dataset.manifestJson, "HIGH");
        const std::set<std::string> low = groupSubjects(dataset.manifestJson, "LOW");
        CHECK(high.size() == 40);
        CHECK(low.size() == 40);

        for (const PlantSpec& plant : config.plants) {
            const double rateHigh = containmentRate(result.sequences, high, plant.pattern);
            const double rateLow = containmentRate(result.sequences, low, plant.pattern);
            CHECK(std::fabs(rateHigh - plant.containHigh) <= 0.15);
            CHECK(std::fabs(rateLow - plant.containLow) <= 0.15);
        }
    }

    TEST_CASE("copy-rate plants separate the groups by instance support") {
        SynthConfig config = smallConfig();
        config.plants = {SynthConfig::defaultPlants()[2]};  // contain 1.0/1.0, copies 5 vs 1
        const SynthDataset dataset = generateDataset(config);
        const CategorizeResult result =
            categorize(parseProgSnap2(dataset.eventsCsv), Scheme::General);
        const std::set<std::string> high = groupSubjects(dataset.manifestJson, "HIGH");

        double meanHigh = 0.0;
        double meanLow = 0.0;
        for (const EventSequence& seq : result.sequences) {
            CHECK(containsPattern(config.plants[0].pattern, seq.events, 1));
            const double count = static_cast<double>(
                countInstanceSupport(config.plants[0].pattern, seq.events, 1));
            (high.count(seq.subjectId) ? meanHigh : meanLow) += count;
        }
        meanHigh /= 40.0;
        meanLow /= 40.0;
        CHECK(meanHigh > meanLow + 1.0);
    }

    TEST_CASE("manifest copy positions point at real plant instances") {
        const SynthConfig config = smallConfig();
        const SynthDataset dataset = generateDataset(config);
        const std::vector<RawEvent> raw = parseProgSnap2(dataset.eventsCsv);
        const nlohmann::json manifest = nlohmann::json::parse(dataset.manifestJson);

        std::size_t checked = 0;
        for (const auto& entry : manifest.at("planted_copies")) {
            if (checked >= 10) break;
            const std::string subject = entry.at("subject").get<std::string>();
            const std::size_t plantIndex = entry.at("plant").get<std::size_t>();
            const Pattern& pattern = config.plants[plantIndex].pattern;

            std::map<std::int64_t, const RawEvent*> byOrder;
            for (const RawEvent& event : raw) {
                if (event.subjectId == subject) byOrder[event.order] = &event;
            }
            for (const auto& startJson : entry.at("start_orders")) {
                const std::int64_t start = startJson.get<std::int64_t>();
                for (std::size_t k = 0; k < pattern.size(); ++k) {
                    const auto it = byOrder.find(start + static_cast<std::int64_t>(k));
                    REQUIRE(it != byOrder.end());
                    const EventType expected = pattern.events[k];
                    const std::string& kind = it->second->eventKind;
                    switch (expected.base) {
                        case BaseEvent::Var: CHECK(kind == "X-AddVariable"); break;
                        case BaseEvent::Chan: CHECK(kind == "X-ChangeBlockCategory"); break;
                        case BaseEvent::File: CHECK(kind == "File.Save"); break;
                        case BaseEvent::Run: CHECK(kind == "Run.Program"); break;
                        default:
                            CHECK(kind == "File.Edit");
                            break;
                    }
                }
                ++checked;
            }
        }
        CHECK(checked > 0);
    }

    TEST_CASE("grades land in disjoint group ranges and recover the groups") {
        const SynthConfig config = smallConfig();
        const SynthDataset dataset = generateDataset(config);
        const auto grades = gradesFromCsv(dataset.labelsCsv);
        const std::set<std::string> high = groupSubjects(dataset.manifestJson, "HIGH");

        for (const auto& [subject, perAssignment] : grades) {
            for (const auto& [assignment, grade] : perAssignment) {
                if (high.count(subject)) {
                    CHECK(grade >= config.gradeHighMin);
                    CHECK(grade <= config.gradeHighMax);
                } else {
                    CHECK(grade >= config.gradeLowMin);
                    CHECK(grade <= config.gradeLowMax);
                }
            }
        }

        const std::map<std::string, Label> labels = medianSplit(finalGrades(grades));
        REQUIRE(labels.size() == 80);
        for (const auto& [subject, label] : labels) {
            CHECK(label == (high.count(subject) ? Label::High : Label::Low));
        }
    }

    TEST_CASE("null calibration configuration is plant-free and two-symbol") {
        SynthConfig config = SynthConfig::nullCalibration();
        CHECK(config.plants.empty());
        CHECK(config.assignments == std::vector<std::string>{"A1"});
        int positiveWeights = 0;
        for (double w : config.backgroundWeights) positiveWeights += w > 0.0 ? 1 : 0;
        CHECK(positiveWeights == 2);

        // Shrink for speed; the structural properties survive.
        config.highSubjects = 6;
        config.lowSubjects = 6;
        config.meanLength = 40.0;
        config.lengthSpread = 4.0;
        const SynthDataset dataset = generateDataset(config);
        const nlohmann::json manifest = nlohmann::json::parse(dataset.manifestJson);
        CHECK(manifest.at("plants").empty());
        CHECK(manifest.at("planted_copies").empty());

        const CategorizeResult result =
            categorize(parseProgSnap2(dataset.eventsCsv), Scheme::General);
        for (const EventSequence& seq : result.sequences) {
            for (const EventType& event : seq.events) {
                CHECK((event.base == BaseEvent::Edit || event.base == BaseEvent::Run));
            }
        }
    }

    TEST_CASE("default plants cover all four classes and survive run collapsing") {
        const std::vector<PlantSpec> plants = SynthConfig::defaultPlants();
        REQUIRE(plants.size() == 4);
        std::set<PatternClass> classes;
        for (const PlantSpec& plant : plants) {
            classes.insert(plant.expectedClass);
            REQUIRE(plant.pattern.size() >= 2);
            for (const EventType& event : plant.pattern.events) CHECK(event.context.empty());
            for (std::size_t i = 1; i < plant.pattern.events.size(); ++i) {
                CHECK(plant.pattern.events[i] != plant.pattern.events[i - 1]);
            }
            CHECK(collapseRuns(plant.pattern.events) == plant.pattern.events);
        }
        CHECK(classes == std::set<PatternClass>{PatternClass::FH, PatternClass::FL,
                                                PatternClass::DH, PatternClass::DL});

        // The two containment plants use disjoint symbols, so one can never
        // embed inside copies of the other.
        std::set<BaseEvent> first;
        std::set<BaseEvent> second;
        for (const EventType& event : plants[0].pattern.events) first.insert(event.base);
        for (const EventType& event : plants[1].pattern.events) second.insert(event.base);
        for (BaseEvent base : first) CHECK(second.count(base) == 0);
    }

    TEST_CASE("malformed configurations are rejected") {
        SynthConfig config = smallConfig();
        config.highSubjects = 0;
        CHECK_THROWS_AS(generateDataset(config), ValidationError);

        config = smallConfig();
        config.assignments.clear();
        CHECK_THROWS_AS(generateDataset(config), ValidationError);

        config = smallConfig();
        config.gradeLowMax = 0.9;  // overlaps the high range
        CHECK_THROWS_AS(generateDataset(config), ValidationError);

        config = smallConfig();
        config.plants[0].containHigh = 1.5;
        CHECK_THROWS_AS(generateDataset(config), ValidationError);

        config = smallConfig();
        config.plants[0].pattern.events = {EventType{BaseEvent::Run, {}},
                                           EventType{BaseEvent::Run, {}}};
        CHECK_THROWS_AS(generateDataset(config), ValidationError);

        config = smallConfig();
        config.plants[0].pattern.events = {EventType{BaseEvent::Run, "pen"}};
        CHECK_THROWS_AS(generateDataset(config), ValidationError);

        config = smallConfig();
        config.meanLength = 3.0;  // shorter than the six-event plant
        CHECK_THROWS_AS(generateDataset(config), ValidationError);

        config = smallConfig();
        config.backgroundWeights = {0, 0, 0, 0, 0, 0, 0, 0};
        CHECK_THROWS_AS(generateDataset(config), ValidationError);
    }
}

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cdsm/event.hpp"
#include "cdsm/seqmine.hpp"
#include "cdsm/statistics.hpp"

namespace cdsm {

/// A ground-truth pattern planted into generated sequences. Each sequence
/// in a group contains the plant with the group's containment probability;
/// a containing sequence receives max(1, poisson(meanCopies)) contiguous
/// copies at uniformly random positions.
struct PlantSpec {
    Pattern pattern;
    double containHigh = 0.0;
    double containLow = 0.0;
    double meanCopiesHigh = 1.0;
    double meanCopiesLow = 1.0;
    PatternClass expectedClass = PatternClass::Discarded;
};

struct SynthConfig {
    int highSubjects = 53;
    int lowSubjects = 53;
    std::vector<std::string> assignments = {"A1", "A2", "A3", "A4", "A5"};
    double meanLength = 500.0;  // background events per sequence, normal
    double lengthSpread = 50.0;
    /// Background event mix over the eight base types, in enum order.
    std::array<double, kBaseEventCount> backgroundWeights = {6, 4, 2, 1, 2, 1, 1, 1};
    std::vector<std::string> categoryNames = {"motion", "looks", "control", "variables"};
    std::vector<PlantSpec> plants = defaultPlants();  // empty = plant nothing
    double gradeHighMin = 0.86;
    double gradeHighMax = 1.0;
    double gradeLowMin = 0.50;
    double gradeLowMax = 0.82;
    double meanSecondsBetweenEvents = 4.0;
    std::uint64_t seed = 1;

    /// One representative plant per pattern class, all collapse-stable.
    static std::vector<PlantSpec> defaultPlants();
    /// A plant-free, tightly controlled configuration for measuring the
    /// false-discovery behaviour of the mining-plus-testing stack.
    static SynthConfig nullCalibration();
};

struct SynthDataset {
    std::string eventsCsv;     // ProgSnap2-style main event table
    std::string labelsCsv;     // SubjectID plus one grade column per assignment
    std::string manifestJson;  // config echo and ground truth
};

/// Fully deterministic for a given config (including seed).
SynthDataset generateDataset(const SynthConfig& config);

}  // namespace cdsm

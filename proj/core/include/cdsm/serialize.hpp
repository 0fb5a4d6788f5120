#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cdsm/features.hpp"
#include "cdsm/model.hpp"
#include "cdsm/report.hpp"
#include "cdsm/seqmine.hpp"
#include "cdsm/statistics.hpp"

namespace cdsm {

/// Sequences travel as JSON Lines: one object per sequence with the
/// subject, assignment, event strings, per-event time ranges, and the
/// activity profile. Reading rejects malformed lines with line numbers.
std::string sequencesToJsonl(const std::vector<EventSequence>& sequences);
std::vector<EventSequence> sequencesFromJsonl(std::istream& in);
std::vector<EventSequence> sequencesFromJsonl(const std::string& text);

/// Classified patterns as a single JSON document, grouped per assignment,
/// with supports, test results, and per-subject instance supports.
std::string patternsToJson(const std::vector<ClassifiedPattern>& patterns, std::size_t highCount,
                           std::size_t lowCount, int maxGap);
struct PatternsFile {
    std::vector<ClassifiedPattern> patterns;
    std::size_t highCount = 0;
    std::size_t lowCount = 0;
    int maxGap = 1;
};
PatternsFile patternsFromJson(const std::string& text);

/// Feature tables as CSV with a leading SubjectID column.
std::string featuresToCsv(const FeatureTable& table);
FeatureTable featuresFromCsv(const std::string& text);

std::string modelToJson(const TrainedModel& model);
TrainedModel modelFromJson(const std::string& text);

std::string evaluationToJson(const EvaluationResult& result);

/// Pattern report as JSON: group sizes, the selection fraction, and one
/// row per pattern with rates, odds ratio (boundary values rendered as
/// the strings "inf" / 0), p-values, selection flag, and subsumption
/// links.
std::string reportToJson(const std::vector<PatternReportRow>& rows,
                         const std::vector<std::size_t>& selected, std::size_t highCount,
                         std::size_t lowCount, double topFraction);

/// Labels CSV: SubjectID plus one numeric grade column per assignment.
std::map<std::string, std::map<std::string, double>> gradesFromCsv(const std::string& text);

std::string readTextFile(const std::string& path);
void writeTextFile(const std::string& path, const std::string& content);

}  // namespace cdsm

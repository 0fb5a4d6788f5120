#pragma once

#include <optional>
#include <span>
#include <string>

#include "cdsm/seqmine.hpp"

namespace cdsm {

/// Differential label: FH/FL from the containment (chi-square) layer,
/// DH/DL from the occurrence-rate (t-test) layer.
enum class PatternClass : std::uint8_t {
    FH,
    FL,
    DH,
    DL,
    Discarded,
};

std::string toString(PatternClass cls);
PatternClass parsePatternClass(const std::string& text);

/// True for FH and DH (patterns associated with high performers).
bool isHighAssociated(PatternClass cls);
/// True for FL and DL.
bool isLowAssociated(PatternClass cls);

struct TestResult {
    double statistic = 0.0;
    double degreesOfFreedom = 0.0;
    double pValue = 1.0;
};

/// Regularized lower incomplete gamma P(a, x).
double regularizedGammaP(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularizedGammaQ(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double regularizedBeta(double x, double a, double b);

/// Upper tail of the chi-squared distribution with `df` degrees of freedom.
double chiSquaredUpperTail(double statistic, double df);
/// Two-sided Student-t tail probability.
double studentTwoSidedP(double t, double df);

/// Pearson chi-square on the 2x2 table [[a, b], [c, d]], one degree of
/// freedom, no continuity correction unless `yates` is set. Throws
/// ValidationError when a row or column total is zero.
TestResult chiSquare2x2(double a, double b, double c, double d, bool yates = false);

/// Welch's two-sided unequal-variance t-test with Welch-Satterthwaite
/// degrees of freedom. Requires at least two points per sample. Two
/// constant samples yield t = 0, p = 1 when equal and p = 0 when not.
TestResult welchTTest(std::span<const double> xs, std::span<const double> ys);

struct OddsRatioResult {
    double value = 1.0;
    /// Set when either fraction sat on 0 or 1, making the ratio 0 or +inf.
    bool atBoundary = false;
};

/// (pHigh / (1 - pHigh)) / (pLow / (1 - pLow)). Boundary inputs produce a
/// flagged 0 or +inf instead of an exception.
OddsRatioResult oddsRatio(double percHigh, double percLow);

struct ClassifyOptions {
    double alpha = 0.05;
    /// Yates continuity correction in the containment layer.
    bool yatesCorrection = false;
    /// Run layer 1 on total occurrence counts instead of sequence
    /// supports: a 1-df goodness-of-fit chi-square of (focHigh, focLow)
    /// against group-size-proportional expectations. Off by default;
    /// intended for sensitivity experiments only.
    bool useFocTotals = false;
};

struct Classification {
    PatternClass label = PatternClass::Discarded;
    std::optional<TestResult> containmentTest;  // layer 1 (absent when degenerate)
    std::optional<TestResult> occurrenceTest;   // layer 2 (absent when layer 1 decided)
};

/// Two-layer classification. Layer 1 runs the chi-square test on
/// [[supportHigh, nHigh - supportHigh], [supportLow, nLow - supportLow]];
/// a significant result labels the pattern FH or FL by the larger group
/// proportion. Otherwise layer 2 runs the Welch t-test on the two
/// instance-support vectors and labels DH or DL by the larger mean, or
/// Discarded when neither layer is significant. A degenerate layer-1
/// table falls through to layer 2.
Classification classifyPattern(const FrequentPatternStats& stats, std::int64_t nHigh,
                               std::int64_t nLow, const ClassifyOptions& options = {});

/// A pattern's statistics together with its differential label.
struct ClassifiedPattern {
    FrequentPatternStats stats;
    Classification classification;
};

}  // namespace cdsm

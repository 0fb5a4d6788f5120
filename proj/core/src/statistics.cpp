#include "cdsm/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdsm/errors.hpp"

namespace cdsm {

std::string toString(PatternClass cls) {
    switch (cls) {
        case PatternClass::FH: return "FH";
        case PatternClass::FL: return "FL";
        case PatternClass::DH: return "DH";
        case PatternClass::DL: return "DL";
        case PatternClass::Discarded: return "Discarded";
    }
    return "Discarded";
}

PatternClass parsePatternClass(const std::string& text) {
    if (text == "FH") return PatternClass::FH;
    if (text == "FL") return PatternClass::FL;
    if (text == "DH") return PatternClass::DH;
    if (text == "DL") return PatternClass::DL;
    if (text == "Discarded") return PatternClass::Discarded;
    throw FormatError("unknown pattern class: \"" + text + "\"");
}

bool isHighAssociated(PatternClass cls) {
    return cls == PatternClass::FH || cls == PatternClass::DH;
}

bool isLowAssociated(PatternClass cls) {
    return cls == PatternClass::FL || cls == PatternClass::DL;
}

namespace {

constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 500;

/// Series expansion of P(a, x), preferred for x < a + 1.
double gammaPSeries(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < kMaxIterations; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Modified-Lentz continued fraction for Q(a, x), preferred for x >= a + 1.
double gammaQContinuedFraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

/// Modified-Lentz continued fraction used by the incomplete beta.
double betaContinuedFraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double clampProbability(double p) {
    return std::min(1.0, std::max(0.0, p));
}

}  // namespace

double regularizedGammaP(double a, double x) {
    if (a <= 0.0 || !std::isfinite(a)) throw ValidationError("regularizedGammaP: a must be > 0");
    if (x < 0.0 || !std::isfinite(x)) throw ValidationError("regularizedGammaP: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return clampProbability(gammaPSeries(a, x));
    return clampProbability(1.0 - gammaQContinuedFraction(a, x));
}

double regularizedGammaQ(double a, double x) {
    if (a <= 0.0 || !std::isfinite(a)) throw ValidationError("regularizedGammaQ: a must be > 0");
    if (x < 0.0 || !std::isfinite(x)) throw ValidationError("regularizedGammaQ: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return clampProbability(1.0 - gammaPSeries(a, x));
    return clampProbability(gammaQContinuedFraction(a, x));
}

double regularizedBeta(double x, double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw ValidationError("regularizedBeta: a and b must be > 0");
    if (x < 0.0 || x > 1.0) throw ValidationError("regularizedBeta: x must be in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                 b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return clampProbability(front * betaContinuedFraction(a, b, x) / a);
    }
    return clampProbability(1.0 - front * betaContinuedFraction(b, a, 1.0 - x) / b);
}

double chiSquaredUpperTail(double statistic, double df) {
    if (df <= 0.0) throw ValidationError("chiSquaredUpperTail: df must be > 0");
    if (statistic <= 0.0) return 1.0;
    if (std::isinf(statistic)) return 0.0;
    return regularizedGammaQ(df / 2.0, statistic / 2.0);
}

double studentTwoSidedP(double t, double df) {
    if (df <= 0.0) throw ValidationError("studentTwoSidedP: df must be > 0");
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    return regularizedBeta(df / (df + t * t), df / 2.0, 0.5);
}

TestResult chiSquare2x2(double a, double b, double c, double d, bool yates) {
    if (a < 0 || b < 0 || c < 0 || d < 0) {
        throw ValidationError("chiSquare2x2: counts must be non-negative");
    }
    const double row1 = a + b;
    const double row2 = c + d;
    const double col1 = a + c;
    const double col2 = b + d;
    if (row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0) {
        throw ValidationError("chiSquare2x2: degenerate table (zero marginal total)");
    }
    const double n = row1 + row2;
    const double observed[4] = {a, b, c, d};
    const double expected[4] = {row1 * col1 / n, row1 * col2 / n, row2 * col1 / n,
                                row2 * col2 / n};
    double statistic = 0.0;
    for (int i = 0; i < 4; ++i) {
        double dev = std::fabs(observed[i] - expected[i]);
        if (yates) dev = std::max(0.0, dev - 0.5);
        statistic += dev * dev / expected[i];
    }
    return TestResult{statistic, 1.0, chiSquaredUpperTail(statistic, 1.0)};
}

namespace {

double sampleMean(std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double sampleVariance(std::span<const double> xs, double mean) {
    double sum = 0.0;
    for (double x : xs) sum += (x - mean) * (x - mean);
    return sum / static_cast<double>(xs.size() - 1);
}

}  // namespace

TestResult welchTTest(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() < 2 || ys.size() < 2) {
        throw ValidationError("welchTTest: each sample needs at least 2 points");
    }
    const double nx = static_cast<double>(xs.size());
    const double ny = static_cast<double>(ys.size());
    const double mx = sampleMean(xs);
    const double my = sampleMean(ys);
    const double vx = sampleVariance(xs, mx);
    const double vy = sampleVariance(ys, my);
    const double se2 = vx / nx + vy / ny;
    if (se2 == 0.0) {
        // Both samples constant: equal means carry no signal, unequal
        // means are unambiguous.
        if (mx == my) return TestResult{0.0, nx + ny - 2.0, 1.0};
        const double sign = mx > my ? 1.0 : -1.0;
        return TestResult{sign * std::numeric_limits<double>::max(), nx + ny - 2.0, 0.0};
    }
    const double t = (mx - my) / std::sqrt(se2);
    double df = se2 * se2;
    double denom = 0.0;
    if (vx > 0.0) denom += (vx / nx) * (vx / nx) / (nx - 1.0);
    if (vy > 0.0) denom += (vy / ny) * (vy / ny) / (ny - 1.0);
    df /= denom;
    return TestResult{t, df, studentTwoSidedP(t, df)};
}

OddsRatioResult oddsRatio(double percHigh, double percLow) {
    if (percHigh < 0.0 || percHigh > 1.0 || percLow < 0.0 || percLow > 1.0) {
        throw ValidationError("oddsRatio: fractions must be in [0, 1]");
    }
    const bool boundary =
        percHigh == 0.0 || percHigh == 1.0 || percLow == 0.0 || percLow == 1.0;
    const double inf = std::numeric_limits<double>::infinity();
    const double oddsHigh = percHigh == 1.0 ? inf : percHigh / (1.0 - percHigh);
    const double oddsLow = percLow == 1.0 ? inf : percLow / (1.0 - percLow);
    double value = 1.0;
    if (std::isinf(oddsHigh) && std::isinf(oddsLow)) {
        value = 1.0;  // both groups saturated; no direction
    } else if (oddsHigh == 0.0 && oddsLow == 0.0) {
        value = 1.0;
    } else if (std::isinf(oddsHigh) || oddsLow == 0.0) {
        value = inf;
    } else if (std::isinf(oddsLow) || oddsHigh == 0.0) {
        value = 0.0;
    } else {
        value = oddsHigh / oddsLow;
    }
    return OddsRatioResult{value, boundary};
}

namespace {

/// 1-df goodness-of-fit of the two occurrence totals against
/// group-size-proportional expectations (the useFocTotals variant).
std::optional<TestResult> focRateTest(double focHigh, double focLow, double nHigh,
                                      double nLow) {
    const double total = focHigh + focLow;
    if (total == 0.0) return std::nullopt;
    const double eHigh = total * nHigh / (nHigh + nLow);
    const double eLow = total * nLow / (nHigh + nLow);
    if (eHigh == 0.0 || eLow == 0.0) return std::nullopt;
    const double statistic = (focHigh - eHigh) * (focHigh - eHigh) / eHigh +
                             (focLow - eLow) * (focLow - eLow) / eLow;
    return TestResult{statistic, 1.0, chiSquaredUpperTail(statistic, 1.0)};
}

}  // namespace

Classification classifyPattern(const FrequentPatternStats& stats, std::int64_t nHigh,
                               std::int64_t nLow, const ClassifyOptions& options) {
    if (nHigh < stats.seqSupportHigh || nLow < stats.seqSupportLow) {
        throw ValidationError("classifyPattern: support exceeds group size");
    }
    if (options.alpha <= 0.0 || options.alpha >= 1.0) {
        throw ValidationError("classifyPattern: alpha must be in (0, 1)");
    }
    Classification result;

    // Layer 1: does containment differ between the groups?
    if (nHigh > 0 && nLow > 0) {
        std::optional<TestResult> test;
        if (options.useFocTotals) {
            test = focRateTest(static_cast<double>(stats.focHigh),
                               static_cast<double>(stats.focLow), static_cast<double>(nHigh),
                               static_cast<double>(nLow));
        } else {
            try {
                test = chiSquare2x2(static_cast<double>(stats.seqSupportHigh),
                                    static_cast<double>(nHigh - stats.seqSupportHigh),
                                    static_cast<double>(stats.seqSupportLow),
                                    static_cast<double>(nLow - stats.seqSupportLow),
                                    options.yatesCorrection);
            } catch (const ValidationError&) {
                // Degenerate table: no layer-1 information, fall through.
            }
        }
        if (test) {
            result.containmentTest = *test;
            if (test->pValue < options.alpha) {
                const double rateHigh = options.useFocTotals
                                            ? static_cast<double>(stats.focHigh) / nHigh
                                            : static_cast<double>(stats.seqSupportHigh) / nHigh;
                const double rateLow = options.useFocTotals
                                           ? static_cast<double>(stats.focLow) / nLow
                                           : static_cast<double>(stats.seqSupportLow) / nLow;
                result.label = rateHigh > rateLow ? PatternClass::FH : PatternClass::FL;
                return result;
            }
        }
    }

    // Layer 2: does the occurrence rate differ despite similar containment?
    if (stats.instanceSupportsHigh.size() >= 2 && stats.instanceSupportsLow.size() >= 2) {
        std::vector<double> high;
        high.reserve(stats.instanceSupportsHigh.size());
        for (const auto& [subject, count] : stats.instanceSupportsHigh) {
            high.push_back(static_cast<double>(count));
        }
        std::vector<double> low;
        low.reserve(stats.instanceSupportsLow.size());
        for (const auto& [subject, count] : stats.instanceSupportsLow) {
            low.push_back(static_cast<double>(count));
        }
        const TestResult test = welchTTest(high, low);
        result.occurrenceTest = test;
        if (test.pValue < options.alpha) {
            result.label = sampleMean(high) > sampleMean(low) ? PatternClass::DH : PatternClass::DL;
            return result;
        }
    }

    result.label = PatternClass::Discarded;
    return result;
}

}  // namespace cdsm

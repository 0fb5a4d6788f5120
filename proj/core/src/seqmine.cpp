#include "cdsm/seqmine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "cdsm/errors.hpp"

namespace cdsm {

std::string toString(const Pattern& pattern) {
    std::string out;
    for (std::size_t i = 0; i < pattern.events.size(); ++i) {
        if (i > 0) out += ' ';
        out += toString(pattern.events[i]);
    }
    return out;
}

Pattern parsePattern(const std::string& text) {
    Pattern pattern;
    std::istringstream in(text);
    std::string token;
    while (in >> token) pattern.events.push_back(parseEventType(token));
    if (pattern.events.empty()) throw FormatError("empty pattern: \"" + text + "\"");
    return pattern;
}

namespace {

using Mask = std::vector<std::uint64_t>;

constexpr std::size_t kNoPos = static_cast<std::size_t>(-1);

bool anySet(const Mask& mask) {
    for (std::uint64_t word : mask) {
        if (word != 0) return true;
    }
    return false;
}

std::size_t lowestSet(const Mask& mask) {
    for (std::size_t w = 0; w < mask.size(); ++w) {
        if (mask[w] != 0) return w * 64 + static_cast<std::size_t>(std::countr_zero(mask[w]));
    }
    return kNoPos;
}

std::size_t highestSet(const Mask& mask) {
    for (std::size_t w = mask.size(); w-- > 0;) {
        if (mask[w] != 0) {
            return w * 64 + (63 - static_cast<std::size_t>(std::countl_zero(mask[w])));
        }
    }
    return kNoPos;
}

/// Lowest set bit at index >= from, or kNoPos.
std::size_t lowestSetAtLeast(const Mask& mask, std::size_t from) {
    std::size_t w = from / 64;
    if (w >= mask.size()) return kNoPos;
    std::uint64_t word = mask[w] & (~std::uint64_t{0} << (from % 64));
    while (true) {
        if (word != 0) return w * 64 + static_cast<std::size_t>(std::countr_zero(word));
        if (++w >= mask.size()) return kNoPos;
        word = mask[w];
    }
}

/// Positions reachable from a set bit by advancing 1..gap+1 steps: the
/// "where may the next pattern element sit" dilation.
Mask dilateForward(const Mask& mask, int maxGap, std::size_t length) {
    Mask out(mask.size(), 0);
    const std::size_t steps = static_cast<std::size_t>(maxGap) + 1;
    if (steps >= length) {
        // Every position past the lowest set bit is reachable.
        const std::size_t low = lowestSet(mask);
        if (low == kNoPos) return out;
        for (std::size_t p = low + 1; p < length; ++p) out[p / 64] |= std::uint64_t{1} << (p % 64);
        return out;
    }
    Mask cur = mask;
    for (std::size_t d = 0; d < steps; ++d) {
        std::uint64_t carry = 0;
        for (std::size_t w = 0; w < cur.size(); ++w) {
            const std::uint64_t next = cur[w] >> 63;
            cur[w] = (cur[w] << 1) | carry;
            carry = next;
            out[w] |= cur[w];
        }
    }
    return out;
}

/// Positions from which a set bit is reachable by advancing 1..gap+1
/// steps: the feasibility-propagation dilation (mirror of dilateForward).
Mask dilateBackward(const Mask& mask, int maxGap, std::size_t length) {
    Mask out(mask.size(), 0);
    const std::size_t steps = static_cast<std::size_t>(maxGap) + 1;
    if (steps >= length) {
        const std::size_t high = highestSet(mask);
        if (high == kNoPos) return out;
        for (std::size_t p = 0; p < high; ++p) out[p / 64] |= std::uint64_t{1} << (p % 64);
        return out;
    }
    Mask cur = mask;
    for (std::size_t d = 0; d < steps; ++d) {
        std::uint64_t carry = 0;
        for (std::size_t w = cur.size(); w-- > 0;) {
            const std::uint64_t next = cur[w] << 63;
            cur[w] = (cur[w] >> 1) | carry;
            carry = next;
            out[w] |= cur[w];
        }
    }
    return out;
}

void andInto(Mask& dst, const Mask& src) {
    for (std::size_t w = 0; w < dst.size(); ++w) dst[w] &= src[w];
}

/// Per-sequence bitset index: one position mask per event type occurring
/// anywhere in the corpus.
struct SeqMasks {
    std::size_t length = 0;
    std::vector<Mask> bySymbol;  // indexed by symbol id; empty mask when absent
};

std::vector<std::uint64_t> emptyWords(std::size_t length) {
    return std::vector<std::uint64_t>((length + 63) / 64, 0);
}

SeqMasks buildMasks(const std::vector<EventType>& events,
                    const std::map<EventType, std::size_t>& alphabet) {
    SeqMasks masks;
    masks.length = events.size();
    masks.bySymbol.assign(alphabet.size(), Mask{});
    for (std::size_t p = 0; p < events.size(); ++p) {
        const auto it = alphabet.find(events[p]);
        if (it == alphabet.end()) continue;
        Mask& mask = masks.bySymbol[it->second];
        if (mask.empty()) mask = emptyWords(events.size());
        mask[p / 64] |= std::uint64_t{1} << (p % 64);
    }
    return masks;
}

/// Right-to-left feasibility table: feas[j] marks positions where
/// pattern[j] can sit such that pattern[j..] still completes.
std::vector<Mask> feasibility(const std::vector<std::size_t>& symbols, const SeqMasks& masks,
                              int maxGap) {
    const std::size_t k = symbols.size();
    std::vector<Mask> feas(k);
    feas[k - 1] = masks.bySymbol[symbols[k - 1]];
    if (feas[k - 1].empty()) feas[k - 1] = emptyWords(masks.length);
    for (std::size_t j = k - 1; j-- > 0;) {
        feas[j] = dilateBackward(feas[j + 1], maxGap, masks.length);
        const Mask& own = masks.bySymbol[symbols[j]];
        if (own.empty()) {
            std::fill(feas[j].begin(), feas[j].end(), 0);
        } else {
            andInto(feas[j], own);
        }
    }
    return feas;
}

/// Walks the leftmost-greedy non-overlapping embeddings, invoking `emit`
/// with each completed index embedding.
template <typename Emit>
void walkEmbeddings(const std::vector<Mask>& feas, Emit&& emit) {
    const std::size_t k = feas.size();
    std::vector<std::size_t> embedding(k);
    std::size_t start = 0;
    while (true) {
        const std::size_t first = lowestSetAtLeast(feas[0], start);
        if (first == kNoPos) return;
        embedding[0] = first;
        for (std::size_t j = 1; j < k; ++j) {
            // Guaranteed in range by the feasibility construction.
            embedding[j] = lowestSetAtLeast(feas[j], embedding[j - 1] + 1);
        }
        emit(embedding);
        start = embedding[k - 1] + 1;
    }
}

std::vector<std::size_t> patternSymbols(const Pattern& pattern,
                                        const std::map<EventType, std::size_t>& alphabet,
                                        bool& allKnown) {
    std::vector<std::size_t> symbols;
    symbols.reserve(pattern.events.size());
    allKnown = true;
    for (const EventType& event : pattern.events) {
        const auto it = alphabet.find(event);
        if (it == alphabet.end()) {
            allKnown = false;
            return symbols;
        }
        symbols.push_back(it->second);
    }
    return symbols;
}

std::map<EventType, std::size_t> singleSequenceAlphabet(const std::vector<EventType>& seq) {
    std::map<EventType, std::size_t> alphabet;
    for (const EventType& event : seq) alphabet.emplace(event, alphabet.size());
    return alphabet;
}

}  // namespace

bool containsPattern(const Pattern& pattern, const std::vector<EventType>& seq, int maxGap) {
    if (pattern.events.empty()) throw ValidationError("containsPattern: empty pattern");
    if (maxGap < 0) throw ValidationError("containsPattern: negative max gap");
    const auto alphabet = singleSequenceAlphabet(seq);
    bool allKnown = false;
    const auto symbols = patternSymbols(pattern, alphabet, allKnown);
    if (!allKnown) return false;
    const SeqMasks masks = buildMasks(seq, alphabet);
    Mask reach = masks.bySymbol[symbols[0]];
    for (std::size_t j = 1; j < symbols.size() && anySet(reach); ++j) {
        reach = dilateForward(reach, maxGap, masks.length);
        andInto(reach, masks.bySymbol[symbols[j]]);
    }
    return anySet(reach);
}

std::vector<std::vector<std::size_t>> findEmbeddings(const Pattern& pattern,
                                                     const std::vector<EventType>& seq,
                                                     int maxGap) {
    if (pattern.events.empty()) throw ValidationError("findEmbeddings: empty pattern");
    if (maxGap < 0) throw ValidationError("findEmbeddings: negative max gap");
    std::vector<std::vector<std::size_t>> embeddings;
    const auto alphabet = singleSequenceAlphabet(seq);
    bool allKnown = false;
    const auto symbols = patternSymbols(pattern, alphabet, allKnown);
    if (!allKnown) return embeddings;
    const SeqMasks masks = buildMasks(seq, alphabet);
    const auto feas = feasibility(symbols, masks, maxGap);
    walkEmbeddings(feas,
                   [&](const std::vector<std::size_t>& embedding) { embeddings.push_back(embedding); });
    return embeddings;
}

std::int64_t countInstanceSupport(const Pattern& pattern, const std::vector<EventType>& seq,
                                  int maxGap) {
    if (pattern.events.empty()) throw ValidationError("countInstanceSupport: empty pattern");
    if (maxGap < 0) throw ValidationError("countInstanceSupport: negative max gap");
    const auto alphabet = singleSequenceAlphabet(seq);
    bool allKnown = false;
    const auto symbols = patternSymbols(pattern, alphabet, allKnown);
    if (!allKnown) return 0;
    const SeqMasks masks = buildMasks(seq, alphabet);
    const auto feas = feasibility(symbols, masks, maxGap);
    std::int64_t count = 0;
    walkEmbeddings(feas, [&](const std::vector<std::size_t>&) { ++count; });
    return count;
}

namespace {

/// Sequences a pattern prefix still reaches, with the positions where the
/// prefix can end.
struct Projection {
    std::vector<std::pair<std::size_t, Mask>> entries;  // (sequence index, reach mask)
};

struct Miner {
    const std::vector<SeqMasks>& masks;
    const std::vector<EventType> symbols;  // id -> event type, sorted ascending
    std::size_t minCount;
    int maxGap;
    int maxLength;
    std::vector<Pattern> out;
    std::vector<EventType> prefix;

    void grow(const Projection& projection) {
        out.push_back(Pattern{prefix});
        if (static_cast<int>(prefix.size()) >= maxLength) return;

        // Dilate every reach mask once; each candidate symbol then needs
        // only an AND against its position mask.
        std::vector<std::pair<std::size_t, Mask>> dilated;
        dilated.reserve(projection.entries.size());
        for (const auto& [seqIdx, reach] : projection.entries) {
            dilated.emplace_back(seqIdx, dilateForward(reach, maxGap, masks[seqIdx].length));
        }

        for (std::size_t symbol = 0; symbol < symbols.size(); ++symbol) {
            Projection next;
            for (const auto& [seqIdx, reach] : dilated) {
                const Mask& symbolMask = masks[seqIdx].bySymbol[symbol];
                if (symbolMask.empty()) continue;
                Mask extended = reach;
                andInto(extended, symbolMask);
                if (anySet(extended)) next.entries.emplace_back(seqIdx, std::move(extended));
            }
            if (next.entries.size() < minCount) continue;
            prefix.push_back(symbols[symbol]);
            grow(next);
            prefix.pop_back();
        }
    }
};

}  // namespace

std::vector<Pattern> enumerateFrequent(const std::vector<EventSequence>& sequences,
                                       const MiningParams& params) {
    if (sequences.empty()) {
        throw ValidationError("enumerateFrequent: no sequences to mine");
    }
    if (params.maxGap < 0) throw ValidationError("enumerateFrequent: negative max gap");
    if (params.maxLength < 1) throw ValidationError("enumerateFrequent: max length below 1");

    std::map<EventType, std::size_t> alphabet;
    for (const EventSequence& seq : sequences) {
        for (const EventType& event : seq.events) alphabet.emplace(event, 0);
    }
    std::vector<EventType> symbols;
    symbols.reserve(alphabet.size());
    for (auto& [event, id] : alphabet) {
        id = symbols.size();
        symbols.push_back(event);
    }

    std::vector<SeqMasks> masks;
    masks.reserve(sequences.size());
    for (const EventSequence& seq : sequences) masks.push_back(buildMasks(seq.events, alphabet));

    const double target = params.minPercentileSupport * static_cast<double>(sequences.size());
    const std::size_t minCount =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(target - 1e-9)));

    Miner miner{masks, symbols, minCount, params.maxGap, params.maxLength, {}, {}};
    if (minCount <= sequences.size()) {
        for (std::size_t symbol = 0; symbol < symbols.size(); ++symbol) {
            Projection root;
            for (std::size_t s = 0; s < masks.size(); ++s) {
                const Mask& mask = masks[s].bySymbol[symbol];
                if (!mask.empty() && anySet(mask)) root.entries.emplace_back(s, mask);
            }
            if (root.entries.size() < minCount) continue;
            miner.prefix.push_back(symbols[symbol]);
            miner.grow(root);
            miner.prefix.pop_back();
        }
    }
    return std::move(miner.out);
}

namespace {

void statsForRange(const std::vector<Pattern>& patterns, std::size_t begin, std::size_t end,
                   const std::vector<SeqMasks>& highMasks, const std::vector<SeqMasks>& lowMasks,
                   const std::vector<EventSequence>& highSeqs,
                   const std::vector<EventSequence>& lowSeqs,
                   const std::map<EventType, std::size_t>& alphabet, int maxGap,
                   const std::string& assignmentId, std::vector<FrequentPatternStats>& out) {
    for (std::size_t p = begin; p < end; ++p) {
        FrequentPatternStats stats;
        stats.pattern = patterns[p];
        stats.assignmentId = assignmentId;
        bool allKnown = false;
        const auto symbols = patternSymbols(patterns[p], alphabet, allKnown);

        const auto tally = [&](const std::vector<SeqMasks>& masks,
                               const std::vector<EventSequence>& seqs, std::int64_t& seqSupport,
                               std::int64_t& foc, std::map<std::string, std::int64_t>& instances) {
            for (std::size_t s = 0; s < seqs.size(); ++s) {
                std::int64_t count = 0;
                if (allKnown && masks[s].length > 0) {
                    const auto feas = feasibility(symbols, masks[s], maxGap);
                    walkEmbeddings(feas, [&](const std::vector<std::size_t>&) { ++count; });
                }
                instances[seqs[s].subjectId] = count;
                foc += count;
                if (count > 0) ++seqSupport;
            }
        };
        tally(highMasks, highSeqs, stats.seqSupportHigh, stats.focHigh,
              stats.instanceSupportsHigh);
        tally(lowMasks, lowSeqs, stats.seqSupportLow, stats.focLow, stats.instanceSupportsLow);
        out[p] = std::move(stats);
    }
}

}  // namespace

std::vector<FrequentPatternStats> collectPatternStats(const std::vector<Pattern>& patterns,
                                                      const std::vector<EventSequence>& highSeqs,
                                                      const std::vector<EventSequence>& lowSeqs,
                                                      int maxGap, int threads) {
    if (maxGap < 0) throw ValidationError("collectPatternStats: negative max gap");
    std::map<EventType, std::size_t> alphabet;
    for (const auto* group : {&highSeqs, &lowSeqs}) {
        for (const EventSequence& seq : *group) {
            for (const EventType& event : seq.events) alphabet.emplace(event, 0);
        }
    }
    std::size_t nextId = 0;
    for (auto& [event, id] : alphabet) id = nextId++;

    std::vector<SeqMasks> highMasks;
    highMasks.reserve(highSeqs.size());
    for (const EventSequence& seq : highSeqs) highMasks.push_back(buildMasks(seq.events, alphabet));
    std::vector<SeqMasks> lowMasks;
    lowMasks.reserve(lowSeqs.size());
    for (const EventSequence& seq : lowSeqs) lowMasks.push_back(buildMasks(seq.events, alphabet));

    std::string assignmentId;
    if (!highSeqs.empty()) {
        assignmentId = highSeqs.front().assignmentId;
    } else if (!lowSeqs.empty()) {
        assignmentId = lowSeqs.front().assignmentId;
    }

    std::vector<FrequentPatternStats> out(patterns.size());
    const std::size_t workers = std::max<std::size_t>(
        1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), patterns.size()));
    if (workers <= 1) {
        statsForRange(patterns, 0, patterns.size(), highMasks, lowMasks, highSeqs, lowSeqs,
                      alphabet, maxGap, assignmentId, out);
        return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (patterns.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(patterns.size(), begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(statsForRange, std::cref(patterns), begin, end, std::cref(highMasks),
                          std::cref(lowMasks), std::cref(highSeqs), std::cref(lowSeqs),
                          std::cref(alphabet), maxGap, std::cref(assignmentId), std::ref(out));
    }
    for (std::thread& t : pool) t.join();
    return out;
}

}  // namespace cdsm

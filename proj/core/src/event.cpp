#include "cdsm/event.hpp"

#include "cdsm/errors.hpp"

namespace cdsm {

namespace {

constexpr const char* kBaseNames[kBaseEventCount] = {
    "EDIT", "EDIT-INS", "EDIT-DEL", "EDIT-PST", "RUN", "FILE", "CHAN", "VAR",
};

}  // namespace

std::string toString(BaseEvent base) {
    return kBaseNames[static_cast<std::size_t>(base)];
}

std::string toString(const EventType& type) {
    std::string out = toString(type.base);
    if (!type.context.empty()) {
        out += '-';
        out += type.context;
    }
    return out;
}

EventType parseEventType(const std::string& text) {
    // Longest base name wins so "EDIT-INS-pen" parses as EDIT-INS with
    // context "pen" rather than EDIT with context "INS-pen".
    const BaseEvent* best = nullptr;
    std::size_t bestLen = 0;
    for (const BaseEvent& base : kAllBaseEvents) {
        const std::string name = toString(base);
        if (text.compare(0, name.size(), name) != 0) continue;
        if (text.size() != name.size() && text[name.size()] != '-') continue;
        if (name.size() >= bestLen) {
            best = &base;
            bestLen = name.size();
        }
    }
    if (best == nullptr) {
        throw FormatError("unknown event type: \"" + text + "\"");
    }
    EventType type{*best, {}};
    if (text.size() > bestLen) {
        type.context = text.substr(bestLen + 1);
        if (type.context.empty()) {
            throw FormatError("empty context suffix in event type: \"" + text + "\"");
        }
    }
    return type;
}

std::string toString(Scheme scheme) {
    return scheme == Scheme::General ? "general" : "contextual";
}

Scheme parseScheme(const std::string& text) {
    if (text == "general") return Scheme::General;
    if (text == "contextual") return Scheme::Contextual;
    throw ValidationError("unknown scheme: \"" + text + "\" (expected general or contextual)");
}

}  // namespace cdsm

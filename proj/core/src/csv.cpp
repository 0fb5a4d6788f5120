#include "cdsm/csv.hpp"

#include <sstream>

#include "cdsm/errors.hpp"

namespace cdsm {

namespace {

/// Parses one record starting at `pos`; advances `pos` past the record's
/// terminator and `line` past any newlines consumed.
std::vector<std::string> parseRecord(const std::string& text, std::size_t& pos,
                                     std::size_t& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    const std::size_t startLine = line;
    while (pos < text.size()) {
        const char c = text[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field += '"';
                    pos += 2;
                } else {
                    quoted = false;
                    ++pos;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
                ++pos;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty()) {
                    throw FormatError("line " + std::to_string(line) +
                                      ": quote inside unquoted field");
                }
                quoted = true;
                ++pos;
                break;
            case ',':
                fields.push_back(std::move(field));
                field.clear();
                ++pos;
                break;
            case '\r':
                if (pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
                [[fallthrough]];
            case '\n':
                ++pos;
                ++line;
                fields.push_back(std::move(field));
                return fields;
            default:
                field += c;
                ++pos;
        }
    }
    if (quoted) {
        throw FormatError("line " + std::to_string(startLine) + ": unterminated quoted field");
    }
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace

std::size_t CsvTable::columnIndex(const std::string& name) const {
    const std::size_t index = findColumn(name);
    if (index == npos) {
        throw FormatError("missing required column \"" + name + "\"");
    }
    return index;
}

std::size_t CsvTable::findColumn(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return npos;
}

CsvTable readCsv(const std::string& text) {
    CsvTable table;
    std::size_t pos = 0;
    std::size_t line = 1;
    if (pos >= text.size()) {
        throw FormatError("empty input: no header row");
    }
    table.header = parseRecord(text, pos, line);
    while (pos < text.size()) {
        const std::size_t rowLine = line;
        std::vector<std::string> row = parseRecord(text, pos, line);
        if (row.size() == 1 && row[0].empty()) continue;  // blank line
        if (row.size() != table.header.size()) {
            throw FormatError("line " + std::to_string(rowLine) + ": expected " +
                              std::to_string(table.header.size()) + " fields, got " +
                              std::to_string(row.size()));
        }
        table.rows.push_back(std::move(row));
        table.rowLines.push_back(rowLine);
    }
    return table;
}

CsvTable readCsv(std::istream& in) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return readCsv(buffer.str());
}

std::string csvEscape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void writeCsvRow(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out += ',';
        out += csvEscape(fields[i]);
    }
    out += '\n';
}

}  // namespace cdsm

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace cdsm {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based source line of each row, for diagnostics.
    std::vector<std::size_t> rowLines;

    /// Index of a header column; throws FormatError when absent.
    std::size_t columnIndex(const std::string& name) const;
    /// Like columnIndex but returns npos when absent.
    std::size_t findColumn(const std::string& name) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Reads a CSV with a header row. Handles quoted fields, embedded commas,
/// doubled quotes, and CRLF endings; rejects rows whose width differs from
/// the header's.
CsvTable readCsv(std::istream& in);
CsvTable readCsv(const std::string& text);

/// Quotes a field only when it needs it.
std::string csvEscape(const std::string& field);
void writeCsvRow(std::string& out, const std::vector<std::string>& fields);

}  // namespace cdsm

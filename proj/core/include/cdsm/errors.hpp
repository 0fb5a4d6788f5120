#pragma once

#include <stdexcept>
#include <string>

namespace cdsm {

/// Malformed input data: missing columns, unparseable cells.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally valid input that violates a consistency rule
/// (duplicate keys, conflicting column definitions).
class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated an operation's precondition or passed an
/// out-of-range parameter.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Filesystem-level failure (missing file, unwritable directory).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cdsm

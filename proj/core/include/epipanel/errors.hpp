#pragma once

#include <stdexcept>
#include <string>

namespace epipanel {

/// Base class for all errors raised by the toolkit.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A series (or overlap) is too short for the requested operation.
struct LengthError : Error {
    using Error::Error;
};

/// A value is outside its admissible domain (negative count, SI > 100, ...).
struct DomainError : Error {
    using Error::Error;
};

/// Series disagree on cadence, or rows are not spaced at the declared cadence.
struct CadenceError : Error {
    using Error::Error;
};

/// A series does not cover the requested date range.
struct CoverageError : Error {
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known.
struct ParseError : Error {
    ParseError(const std::string& file, long line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file(file), line(line) {}
    explicit ParseError(const std::string& what) : Error(what), file(), line(0) {}
    std::string file;
    long line;
};

/// The assembled panel has holes; message lists offending cells.
struct BalanceError : Error {
    using Error::Error;
};

/// Design matrix is rank deficient. Names a column involved in the dependency.
struct SingularDesignError : Error {
    SingularDesignError(const std::string& column, const std::string& what)
        : Error(what), column(column) {}
    std::string column;
};

/// A country is missing from a source, or has no usable WHO region.
struct CountryError : Error {
    using Error::Error;
};

/// Bad run configuration (missing path, unknown model id, ...).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace epipanel

#pragma once

#include <stdexcept>
#include <string>

namespace bayesfault {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied arguments that violate a precondition (shape, range, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A CSV or config file could not be parsed. Row/column are 1-based, 0 if unknown.
class ParseError : public InvalidInput {
public:
    ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
        : InvalidInput(format(what, row, column)), row_(row), column_(column) {}
    /// Keeps the location of `inner` and prefixes its message, e.g. with a file name.
    ParseError(const std::string& context, const ParseError& inner)
        : InvalidInput(context + ": " + inner.what()), row_(inner.row_), column_(inner.column_) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t row, std::size_t column) {
        if (row == 0) return what;
        std::string out = what + " (row " + std::to_string(row);
        if (column != 0) out += ", column " + std::to_string(column);
        return out + ")";
    }

    std::size_t row_;
    std::size_t column_;
};

/// A computation produced a non-finite value or failed to converge.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Normal equations are not positive definite; `dimension` is the 0-based
/// feature index whose pivot collapsed.
class SingularSystem : public NumericalFailure {
public:
    SingularSystem(const std::string& what, std::size_t dimension)
        : NumericalFailure(what), dimension_(dimension) {}

    std::size_t dimension() const noexcept { return dimension_; }

private:
    std::size_t dimension_;
};

}  // namespace bayesfault

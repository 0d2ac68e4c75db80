#ifndef EIVSEL_ERRORS_HPP_
#define EIVSEL_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace eiv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

/// Shapes of two related objects disagree. `field()` names the offender.
class DimensionError : public Error {
 public:
    DimensionError(std::string field, const std::string& what)
        : Error(what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

 private:
    std::string field_;
};

/// A NaN or infinity where a finite number is required (0-based location).
class NonFiniteError : public Error {
 public:
    NonFiniteError(std::string field, std::size_t row, std::size_t col);
    const std::string& field() const { return field_; }
    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

 private:
    std::string field_;
    std::size_t row_;
    std::size_t col_;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
    using Error::Error;
};

/// Estimator or program description that violates its own invariants.
class SpecError : public Error {
 public:
    using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const { return line_; }

 private:
    std::size_t line_;
};

}  // namespace eiv

#endif  // EIVSEL_ERRORS_HPP_

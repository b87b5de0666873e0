#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conebvp {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position` is the 0-based character offset.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Evaluation left the real domain (log/sqrt of a negative, division by zero,
/// overflow) or referenced a variable that was not bound.
class EvalError : public Error {
public:
    using Error::Error;
};

/// A problem description violates a structural precondition
/// (component counts, radii, exponents, ...).
class SpecError : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not satisfy its precondition
/// (no sign change, nonpositive weight, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace conebvp

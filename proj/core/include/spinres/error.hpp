#pragma once

#include <stdexcept>
#include <string>

namespace spinres
{
/// Input outside the mathematical domain of an operation (negative field,
/// non-unit axis, non-positive rate).
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// A search (root bracket, resonance dip) found nothing.
class NotFoundError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: quadrature non-convergence, step underflow, NaN.
class NumericError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Too little usable data for the requested analysis.
class InsufficientDataError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public std::runtime_error
{
public:
    ParseError(const std::string &what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};
} // namespace spinres

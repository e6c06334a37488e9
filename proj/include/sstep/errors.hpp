#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sstep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

/// Lanczos saw a non-positive Ritz value, or spectral bounds are degenerate.
class SpectralError : public Error {
public:
    using Error::Error;
};

class NotSpdError : public Error {
public:
    using Error::Error;
};

class SingularError : public Error {
public:
    using Error::Error;
};

/// Non-finite values, divergence or float-range overflow.
class NumericalError : public Error {
public:
    using Error::Error;
};

class HierarchyError : public Error {
public:
    using Error::Error;
};

/// A Krylov basis column collapsed to zero (or overflowed).
class BreakdownError : public Error {
public:
    BreakdownError(std::size_t column, const std::string& what)
        : Error(what + " (column " + std::to_string(column) + ")"), column_(column) {}

    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

} // namespace sstep

#pragma once

#include <stdexcept>
#include <string>

namespace statlab {

/// Base class for every error raised by the library. The CLI maps the
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unparseable word, generator index outside the rank, bad JSON payload.
class MalformedInput : public Error {
public:
    using Error::Error;
};

/// Operands built over free groups of different rank.
class ContextMismatch : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A support or iteration cap was hit before the requested result.
class ResourceLimitError : public Error {
public:
    explicit ResourceLimitError(const std::string& what, std::size_t cap = 0)
        : Error(what), cap_(cap) {}
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t cap_;
};

/// A cylinder table is too shallow for the requested translate.
class DepthUnderflow : public Error {
public:
    DepthUnderflow(const std::string& what, int required, int available)
        : Error(what), required_(required), available_(available) {}
    int required() const noexcept { return required_; }
    int available() const noexcept { return available_; }

private:
    int required_;
    int available_;
};

/// An iterative solver stopped without reaching its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Evaluation needs values outside the table it was given.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// A boundary point could not be read off a sample path; carries the
/// (possibly empty) prefix that did stabilize.
class UnresolvedError : public Error {
public:
    UnresolvedError(const std::string& what, std::string partial_prefix)
        : Error(what), partial_(std::move(partial_prefix)) {}
    const std::string& partial_prefix() const noexcept { return partial_; }

private:
    std::string partial_;
};

/// A search or construction could not meet its target within budget.
class ConstructionError : public Error {
public:
    using Error::Error;
};

} // namespace statlab

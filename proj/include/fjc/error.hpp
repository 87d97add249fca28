#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fjc {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (edge lists, traces, config files).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A precondition on a graph or parameter vector was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative method ran out of iterations. Carries the last iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last, double residual)
        : Error(what), last_(std::move(last)), residual_(residual) {}

    const std::vector<double>& last_iterate() const noexcept { return last_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<double> last_;
    double residual_;
};

/// A linear system could not be solved to the required residual.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace fjc

#pragma once

#include <stdexcept>
#include <string>

namespace tacpalm {

// Base error carrying a machine-parseable category. The CLI maps categories
// to exit codes and prints them as "error:<category>: <message>".
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

// Bad arguments or preconditions (exit code 1 at the CLI).
class UsageError : public Error {
public:
    explicit UsageError(const std::string& message) : Error("usage", message) {}
};

// Missing files, unreadable paths, shape mismatches (exit code 2).
class InputError : public Error {
public:
    explicit InputError(const std::string& message) : Error("input", message) {}
};

// Malformed file contents or protocol violations (exit code 2).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& message) : Error("format", message) {}
};

// Numerical failure: non-convergence, degenerate systems (exit code 3).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& message) : Error("numeric", message) {}
};

}  // namespace tacpalm

#pragma once

#include <stdexcept>
#include <string>

namespace aimsim {

/// Raised when a document or value violates a schema or type invariant.
/// CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when structured input cannot be parsed at all; the message names
/// the offending field. CLI maps this to exit code 2 as well.
class ParseError : public ValidationError {
public:
    explicit ParseError(const std::string& msg) : ValidationError(msg) {}
};

/// Unrecoverable condition discovered while simulating (e.g. no V-f pair
/// left to recover with). CLI maps this to exit code 3.
class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace aimsim

#pragma once

#include <stdexcept>
#include <string>

namespace wsdse {

/// Raised when an input file is missing, malformed, or violates its schema.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a computation is infeasible for the given configuration
/// (budget cannot be met, candidate count exceeds the cap, rank deficiency).
class ComputeError : public std::runtime_error {
public:
    explicit ComputeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Precondition violations on in-memory objects (shape mismatches, bad k).
class InvalidArgument : public std::invalid_argument {
public:
    explicit InvalidArgument(const std::string& msg) : std::invalid_argument(msg) {}
};

} // namespace wsdse

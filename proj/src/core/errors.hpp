#pragma once

#include <stdexcept>
#include <string>

namespace swarm {

// Invalid or inconsistent configuration (bad JSON, out-of-range values,
// shape mismatches). Maps to exit code 1 at the CLI boundary.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure during an otherwise well-configured run (I/O, divergence guard).
// Maps to exit code 2 at the CLI boundary.
class RuntimeFailure : public std::runtime_error {
public:
    explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace swarm

#pragma once

#include <stdexcept>
#include <string>

namespace helflow {

// Bad user input: malformed config file, unknown key, invalid parameter
// combination.  CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime failure in the math: inadmissible height field, degenerate metric,
// linear/Newton solver failure, infeasible constraint targets.  CLI exit 1.
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace helflow

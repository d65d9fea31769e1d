#pragma once

#include <stdexcept>
#include <string>

namespace hypx {

// Shape/size mismatches and degenerate dimensions.
struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Bad experiment/agent configuration (unknown keys, inconsistent dims).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A documented precondition was violated by the caller.
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// IDS saw zero variance everywhere with positive regret; caller may fall back to TS.
struct DegenerateInformationError : std::runtime_error {
  explicit DegenerateInformationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hypx

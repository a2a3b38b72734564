#pragma once

#include <stdexcept>
#include <string>

namespace biclkt {

// Error taxonomy maps onto process exit codes in the CLI:
//   ConfigError -> 2, ArtifactError -> 3, DivergenceError -> 4,
//   DataError/LookupError/MetricError -> 5, anything else -> 1.

struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& m) : std::runtime_error(m) {}
};

struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& m) : std::runtime_error(m) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& m) : std::runtime_error(m) {}
};

struct LookupError : std::runtime_error {
  explicit LookupError(const std::string& m) : std::runtime_error(m) {}
};

struct ArtifactError : std::runtime_error {
  explicit ArtifactError(const std::string& m) : std::runtime_error(m) {}
};

struct MetricError : std::runtime_error {
  explicit MetricError(const std::string& m) : std::runtime_error(m) {}
};

struct DivergenceError : std::runtime_error {
  int epoch;
  DivergenceError(const std::string& m, int ep) : std::runtime_error(m), epoch(ep) {}
};

}  // namespace biclkt

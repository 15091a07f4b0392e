#pragma once

#include <stdexcept>
#include <string>

namespace permurank {

/// Malformed or incompatible data file (bad schema version, truncated line,
/// missing field). Carries the offending line number when known.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_number(line) {}
  long line_number;
};

/// Optimization produced a non-finite loss.
struct TrainingFailure : std::runtime_error {
  TrainingFailure(const std::string& msg, int epoch)
      : std::runtime_error(msg + " (epoch " + std::to_string(epoch) + ")"), epoch(epoch) {}
  int epoch;
};

}  // namespace permurank

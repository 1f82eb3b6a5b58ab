#pragma once

#include <stdexcept>
#include <string>

namespace equity {

// Error classes map one-to-one onto CLI exit codes.
enum class ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kInput = 2,
  kLabeling = 3,
  kTraining = 4,
  kEvaluation = 5,
  kIo = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ExitCode::kUsage, what) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ExitCode::kInput, what) {}
};
struct LabelingError : Error {
  explicit LabelingError(const std::string& what) : Error(ExitCode::kLabeling, what) {}
};
struct TrainingError : Error {
  explicit TrainingError(const std::string& what) : Error(ExitCode::kTraining, what) {}
};
struct EvaluationError : Error {
  explicit EvaluationError(const std::string& what) : Error(ExitCode::kEvaluation, what) {}
};
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ExitCode::kIo, what) {}
};

// Invalid synthetic-generator configuration; reported as a usage problem.
struct ConfigError : UsageError {
  explicit ConfigError(const std::string& what) : UsageError(what) {}
};

}  // namespace equity

#pragma once

#include <stdexcept>
#include <string>

namespace csisense {

/// Bad argument or violated precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dataset or model file whose contents do not match the expected layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Open/read/write failure, including truncated payloads.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown during model fitting (e.g. a NaN loss).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wraps an error raised inside one pipeline stage, keeping the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string &what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}

  [[nodiscard]] const std::string &stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace csisense

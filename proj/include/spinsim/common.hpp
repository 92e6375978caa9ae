#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace spinsim {

// Process exit codes shared by the library error classes and the CLI.
enum class ErrorCode : int {
  validation = 2,  // bad config, bad geometry, malformed payloads
  rules = 3,       // challenge rule violations (causality, ...)
  io = 4,          // filesystem / file format trouble
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}
  ErrorCode code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

private:
  ErrorCode code_;
};

struct ValidationError : Error {
  explicit ValidationError(std::string msg)
      : Error(ErrorCode::validation, std::move(msg)) {}
};

struct RulesError : Error {
  explicit RulesError(std::string msg)
      : Error(ErrorCode::rules, std::move(msg)) {}
};

struct IoError : Error {
  explicit IoError(std::string msg) : Error(ErrorCode::io, std::move(msg)) {}
};

// scene_gen
struct InfeasibleReverberationError : ValidationError {
  using ValidationError::ValidationError;
};
struct InfeasibleGeometryError : ValidationError {
  using ValidationError::ValidationError;
};
struct SamplingFailureError : ValidationError {
  using ValidationError::ValidationError;
};
struct InvalidGeometryError : ValidationError {
  using ValidationError::ValidationError;
};

// renderer
struct NotFoundError : ValidationError {
  using ValidationError::ValidationError;
};
struct RenderOverflowError : ValidationError {
  using ValidationError::ValidationError;
};
struct SilentTargetError : ValidationError {
  using ValidationError::ValidationError;
};
struct InsufficientCorpusError : ValidationError {
  using ValidationError::ValidationError;
};

// listener model / enhancement
struct InvalidArgumentError : ValidationError {
  using ValidationError::ValidationError;
};
struct MalformedInputError : ValidationError {
  using ValidationError::ValidationError;
};
struct CannotVerifyError : ValidationError {
  using ValidationError::ValidationError;
};

// prediction
struct AlignmentFailureError : ValidationError {
  using ValidationError::ValidationError;
};
struct SilentReferenceError : ValidationError {
  using ValidationError::ValidationError;
};
struct FitFailureError : ValidationError {
  using ValidationError::ValidationError;
};

// panel
struct InvalidTranscriptError : ValidationError {
  using ValidationError::ValidationError;
};
struct IncompletePanelError : ValidationError {
  using ValidationError::ValidationError;
};

// harness
struct IncompleteEntryError : ValidationError {
  using ValidationError::ValidationError;
};
struct SchemaError : ValidationError {
  using ValidationError::ValidationError;
};
struct ScoreRangeError : ValidationError {
  using ValidationError::ValidationError;
};
struct DisqualifiedEntryError : RulesError {
  using RulesError::RulesError;
};

}  // namespace spinsim

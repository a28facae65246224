#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace beyond {

/// Error codes shared by every module. The names are part of the wire
/// contract: the service reports them verbatim in 409 bodies and the CLI
/// prints them on its one-line error output.
enum class ErrorCode {
  InvalidWall,
  InvalidInput,
  InvalidContent,
  InvalidScenario,
  TrainingFailed,
  IncompatibleModel,
  NotAvailable,
  NotCollected,
  AlreadyCollected,
  NotProjected,
  PositionOccupied,
  PositionEmpty,
  UnknownEntity,
  EmptyAssembly,
  NoSample,
  NoGadgets,
  SimulationPending,
  NoPendingSimulation,
  RestoreFailed,
  NotFound,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const { return to_string(code_); }

 private:
  ErrorCode code_;
};

}  // namespace beyond

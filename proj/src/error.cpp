#include "beyond/error.hpp"

namespace beyond {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidWall: return "InvalidWall";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidContent: return "InvalidContent";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::TrainingFailed: return "TrainingFailed";
    case ErrorCode::IncompatibleModel: return "IncompatibleModel";
    case ErrorCode::NotAvailable: return "NotAvailable";
    case ErrorCode::NotCollected: return "NotCollected";
    case ErrorCode::AlreadyCollected: return "AlreadyCollected";
    case ErrorCode::NotProjected: return "NotProjected";
    case ErrorCode::PositionOccupied: return "PositionOccupied";
    case ErrorCode::PositionEmpty: return "PositionEmpty";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::EmptyAssembly: return "EmptyAssembly";
    case ErrorCode::NoSample: return "NoSample";
    case ErrorCode::NoGadgets: return "NoGadgets";
    case ErrorCode::SimulationPending: return "SimulationPending";
    case ErrorCode::NoPendingSimulation: return "NoPendingSimulation";
    case ErrorCode::RestoreFailed: return "RestoreFailed";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace beyond

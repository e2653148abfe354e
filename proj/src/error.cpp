#include "loopsoup/error.hpp"

namespace loopsoup {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DegenerateDerivative: return "DegenerateDerivative";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::NonIntegrable: return "NonIntegrable";
    case ErrorCode::EndpointMismatch: return "EndpointMismatch";
    case ErrorCode::PointNotOnLoop: return "PointNotOnLoop";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::WindowUnbounded: return "WindowUnbounded";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::Budget: return "Budget";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::SparseTable: return "SparseTable";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

} // namespace loopsoup

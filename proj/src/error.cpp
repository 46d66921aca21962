#include "pil/error.hpp"

namespace pil {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::IntegrationDiverged: return "integration-diverged";
    case ErrorKind::SingularMatrix: return "singular-matrix";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::BoundaryState: return "boundary-state";
    case ErrorKind::InvalidGateParams: return "invalid-gate-params";
    case ErrorKind::NoSettle: return "no-settle";
    case ErrorKind::NonFixedPoint: return "non-fixed-point";
    case ErrorKind::AmbiguousState: return "ambiguous-state";
    case ErrorKind::UndefinedMetric: return "undefined-metric";
    case ErrorKind::ChannelIrregular: return "channel-irregular";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::BorderContact: return "border-contact";
    case ErrorKind::InternalLogic: return "internal-logic";
    }
    return "unknown";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidGateParams:
        return 2;
    default:
        return 3;
    }
}

} // namespace pil

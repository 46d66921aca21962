#pragma once

#include <stdexcept>
#include <string>

namespace pil {

enum class ErrorKind {
    InvalidConfig,
    IntegrationDiverged,
    SingularMatrix,
    NoConvergence,
    BoundaryState,
    InvalidGateParams,
    NoSettle,
    NonFixedPoint,
    AmbiguousState,
    UndefinedMetric,
    ChannelIrregular,
    InsufficientData,
    BorderContact,
    InternalLogic,
};

const char* to_string(ErrorKind kind);

// Exit code the CLI maps each kind to: 2 for configuration, 3 for numerics.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Integration blew up; carries the offending step.
class DivergedError : public Error {
public:
    DivergedError(long step, const std::string& what)
        : Error(ErrorKind::IntegrationDiverged, what), step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

} // namespace pil

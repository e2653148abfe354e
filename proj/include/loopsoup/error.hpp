#pragma once

#include <stdexcept>
#include <string>

namespace loopsoup {

enum class ErrorCode {
    InvalidArgument,
    OutOfDomain,
    DegenerateDerivative,
    NonConvergent,
    NonIntegrable,
    EndpointMismatch,
    PointNotOnLoop,
    DegenerateGrid,
    WindowUnbounded,
    WindowTooSmall,
    Budget,
    TooFewSamples,
    SparseTable,
    Io,
    Config,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace loopsoup

#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace tvlasso {

enum class ErrorCode {
    invalid_argument = 1,
    not_converged = 2,
    undefined_ratio = 3,
    degenerate = 4,
    io = 5,
    parse = 6,
    internal = 7,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by path-level operations when a single fit fails to converge.
class ConvergenceError : public Error {
public:
    ConvergenceError(double lambda, const std::string& message)
        : Error(ErrorCode::not_converged, message), lambda_(lambda) {}

    double lambda() const noexcept { return lambda_; }

private:
    double lambda_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
    if (!condition) throw Error(ErrorCode::invalid_argument, message);
}

}  // namespace tvlasso

#pragma once

#include <stdexcept>
#include <string>

namespace ttkm {

enum class ErrorKind {
    Bounds,
    Shape,
    ExpansionTooLarge,
    DegenerateFeature,
    Usage,
    RankDeficient,
    NotPositiveDefinite,
    NonFinite,
    Parse,
    Io,
    Validation,
    Internal,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` drives the C API status code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace ttkm

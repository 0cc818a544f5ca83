#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tra {

enum class ErrorKind {
    InvalidInput,
    InsufficientData,
    DegenerateRegressor,
    DegenerateInput,
    InvalidWindow,
    InvalidConfig,
    OracleSizeExceeded,
    StabilityFailure,
    BootstrapFailure,
    InvalidScenario,
    IoError,
    ParseError,
    EmptyPair,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid input";
        case ErrorKind::InsufficientData: return "insufficient samples";
        case ErrorKind::DegenerateRegressor: return "degenerate regressor";
        case ErrorKind::DegenerateInput: return "degenerate input";
        case ErrorKind::InvalidWindow: return "invalid window";
        case ErrorKind::InvalidConfig: return "invalid config";
        case ErrorKind::OracleSizeExceeded: return "oracle size exceeded";
        case ErrorKind::StabilityFailure: return "stability failure";
        case ErrorKind::BootstrapFailure: return "bootstrap failure";
        case ErrorKind::InvalidScenario: return "invalid scenario";
        case ErrorKind::IoError: return "io error";
        case ErrorKind::ParseError: return "parse error";
        case ErrorKind::EmptyPair: return "empty pair";
    }
    return "unknown error";
}

// Every failure raised by the library. `index` carries the subsample,
// bootstrap replicate or line number when one applies.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), index_(index) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorKind kind_;
    std::optional<std::size_t> index_;
};

}  // namespace tra

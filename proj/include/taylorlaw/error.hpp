#pragma once

#include <stdexcept>
#include <string>

namespace taylorlaw {

enum class ErrorKind {
    Domain,           // argument outside its mathematical domain
    InsufficientData, // too few points / pairs to compute a statistic
    Degenerate,       // a computation collapsed (zero variance regressor, empty window, ...)
    Identifiability,  // decomposition cell graph is disconnected
    Config,           // bad configuration or CLI usage
    Data,             // malformed input file
    Io,               // filesystem failure
    Numeric           // internal numeric failure (non-convergence)
};

inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InsufficientData: return "insufficient_data";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Identifiability: return "identifiability";
    case ErrorKind::Config: return "config";
    case ErrorKind::Data: return "data";
    case ErrorKind::Io: return "io";
    case ErrorKind::Numeric: return "numeric";
    }
    return "unknown";
}

/// Single exception type for the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// CLI exit codes: 1 usage/config, 2 data, 3 internal numeric failure.
inline int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Config: return 1;
    case ErrorKind::Data:
    case ErrorKind::Io:
    case ErrorKind::Domain:
    case ErrorKind::InsufficientData:
    case ErrorKind::Identifiability:
    case ErrorKind::Degenerate: return 2;
    case ErrorKind::Numeric: return 3;
    }
    return 3;
}

} // namespace taylorlaw

#pragma once

#include <stdexcept>
#include <string>

namespace robustgen {

// Base class for everything this toolkit throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or rank disagreement between tensors/layers.
struct DimensionError : Error {
    using Error::Error;
};

// An input exceeds a hard size cap (e.g. materializing a huge linear map).
struct SizeError : Error {
    using Error::Error;
};

// Malformed JSON/CSV input; `where` carries a byte or line position when known.
struct ParseError : Error {
    ParseError(const std::string& msg, long long where_ = -1) : Error(msg), where(where_) {}
    long long where;
};

// Serialized container written by an incompatible format version.
struct VersionError : Error {
    using Error::Error;
};

// Iterative numeric routine ran out of iterations; carries the best estimate so far.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, double partial_)
        : Error(msg), partial(partial_) {}
    double partial;
};

// A bracketing search cannot start because the precondition fails
// (e.g. unperturbed error already above the target).
struct SearchInfeasibleError : Error {
    using Error::Error;
};

// External data could not be ingested (missing file, ragged rows, bad labels).
struct IngestionError : Error {
    using Error::Error;
};

// A manifest or command configuration is unusable (unreadable file, unknown
// key, dangling dataset reference, out-of-range setting).
struct ConfigError : Error {
    using Error::Error;
};

// An operation that needs at least one data point got none.
struct EmptyDataError : Error {
    using Error::Error;
};

}  // namespace robustgen

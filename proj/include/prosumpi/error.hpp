#pragma once

#include <stdexcept>
#include <string>

namespace prosumpi {

// Error categories map one-to-one onto CLI exit codes (see tools/).
enum class ErrorKind { configuration, ingestion, input, state, snapshot };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Invalid parameters or violated preconditions on configuration.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::configuration, what) {}
};

/// Malformed, unsorted or gap-ridden time-series data.
struct IngestionError : Error {
    explicit IngestionError(const std::string& what) : Error(ErrorKind::ingestion, what) {}
};

/// A single value that cannot be processed (NaN, infinity).
struct InputError : Error {
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// Operation not valid in the object's current state (untrained, empty).
struct StateError : Error {
    explicit StateError(const std::string& what) : Error(ErrorKind::state, what) {}
};

/// Snapshot version mismatch, truncation or checksum failure.
struct SnapshotError : Error {
    explicit SnapshotError(const std::string& what) : Error(ErrorKind::snapshot, what) {}
};

}  // namespace prosumpi

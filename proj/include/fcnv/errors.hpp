#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace fcnv {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched dimensions, empty axes, invalid conv geometry.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid configuration values (non-positive dims, bad probabilities,
// unknown config keys, ill-formed model wiring).
struct ConfigError : Error {
  using Error::Error;
};

// Malformed dataset files or misaligned fields.
struct DataError : Error {
  using Error::Error;
};

// Out-of-range ids (embedding lookups, class targets).
struct IndexError : Error {
  using Error::Error;
};

// Model artifact I/O. Checksum, version and truncation failures are
// distinguishable so callers can report them separately.
struct ArtifactError : Error {
  using Error::Error;
};
struct ArtifactChecksumError : ArtifactError {
  using ArtifactError::ArtifactError;
};
struct ArtifactVersionError : ArtifactError {
  using ArtifactError::ArtifactError;
};
struct ArtifactTruncatedError : ArtifactError {
  using ArtifactError::ArtifactError;
};

// Violated internal invariants (bugs, not user input).
struct InternalError : Error {
  using Error::Error;
};

// Non-fatal diagnostics (e.g. a bottleneck width that cannot reduce
// parameters). Default handler writes "warning: ..." to stderr; tests
// install their own sink.
void warn(const std::string& message);
void set_warning_handler(std::function<void(const std::string&)> handler);

}  // namespace fcnv

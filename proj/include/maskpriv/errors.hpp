#pragma once

#include <stdexcept>
#include <string>

namespace maskpriv {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rejected argument value (bad region, bad factor, degenerate crop, ...).
struct InvalidParameter : Error {
    using Error::Error;
};

/// Dataset unusable for training (missing class, too few samples).
struct InvalidDataset : Error {
    using Error::Error;
};

/// Oracle detector asked to run without ground-truth metadata.
struct MissingMetadata : Error {
    using Error::Error;
};

/// Deployment mode and supplied components do not match.
struct ConfigurationError : Error {
    using Error::Error;
};

/// File-level I/O problem (PPM header, model file, manifest).
struct IoError : Error {
    using Error::Error;
};

/// Wire-format decode failure.
struct CodecError : Error {
    using Error::Error;
};

/// Capture could not be audited at all (distinct from a non-compliant verdict).
struct AuditError : Error {
    using Error::Error;
};

} // namespace maskpriv

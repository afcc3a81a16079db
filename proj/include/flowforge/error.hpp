#pragma once

#include <stdexcept>
#include <string>

namespace flowforge {

/// Base of every error the library throws on bad input or bad state.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file does not follow the expected layout (pcap header, CSV schema, JSON).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Capture uses a link type or variant this tool does not handle.
class UnsupportedFormatError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Scenario configuration is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Data violates a precondition (orphan owner, unknown class id, schema mismatch).
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Bad command-line usage; maps to exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace flowforge

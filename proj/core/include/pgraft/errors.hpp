#pragma once

#include <stdexcept>
#include <string>

namespace pgraft {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised for invalid configuration. `key()` names the offending config key when known.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key.empty() ? message : key + ": " + message), m_key(std::move(key)) {}

    const std::string& key() const noexcept { return m_key; }

private:
    std::string m_key;
};

class NumericFailure : public Error {
public:
    NumericFailure(int step, const std::string& message)
        : Error("step " + std::to_string(step) + ": " + message), m_step(step) {}

    int step() const noexcept { return m_step; }

private:
    int m_step;
};

class BackendError : public Error {
public:
    using Error::Error;
};

/// Transport gave up after the configured retries.
class BackendUnavailable : public BackendError {
public:
    using BackendError::BackendError;
};

/// The peer answered, but the body violates the wire schema.
class ProtocolError : public BackendError {
public:
    using BackendError::BackendError;
};

class ScorerError : public Error {
public:
    using Error::Error;
};

}  // namespace pgraft

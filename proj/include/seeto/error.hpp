#pragma once

#include <stdexcept>
#include <string>

namespace seeto {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on the arguments was violated by the caller.
class UsageError : public Error {
public:
    using Error::Error;
};

// Input data is numerically degenerate (zero-norm latent, constant states, ...).
class DegeneracyError : public Error {
public:
    using Error::Error;
};

// A model was asked to fit fewer points than it needs.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Factorization or other numerical routine failed after all retries.
class NumericalError : public Error {
public:
    using Error::Error;
};

// A metric is undefined for the given inputs (e.g. zero reference HV).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

// Malformed text input; carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Archive written by an incompatible format version.
class MigrationError : public Error {
public:
    using Error::Error;
};

// Archive record content does not match its stored checksum.
class ChecksumError : public Error {
public:
    using Error::Error;
};

// Experiment configuration failed schema validation. `path` names the field.
class ConfigError : public Error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace seeto

#pragma once

#include <stdexcept>
#include <string>

namespace yescert {

// Base of every error the library throws. Callers that only care about
// "something in yescert failed" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape disagreement between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Non-convergence or non-finite values inside a numerical kernel.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Invalid configuration; `field` is a JSON-pointer-like path ("network.layers").
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Input data violates a documented precondition (e.g. targets outside the
// range of the final activation).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed on-disk input; carries the byte offset where parsing failed.
class IngestError : public Error {
public:
    IngestError(const std::string& message, std::size_t offset)
        : Error(message + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// A file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

// Raised by the optimizer when a gradient or parameter goes non-finite.
class TrainingFault : public Error {
public:
    using Error::Error;
};

} // namespace yescert

#pragma once

#include <stdexcept>
#include <string>

namespace symscene {

// Base of every error thrown by the library. kind() is a stable tag used in
// the CLI's machine-readable error output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message, std::string location = {})
        : std::runtime_error(message), kind_(std::move(kind)), location_(std::move(location)) {}

    const std::string& kind() const noexcept { return kind_; }
    // JSON path ("/instances/2/rle/counts") or byte offset ("byte 12"); may be empty.
    const std::string& location() const noexcept { return location_; }

    // {"error": kind, "message": ..., "location": ...} on a single line.
    std::string to_json() const;

private:
    std::string kind_;
    std::string location_;
};

// Malformed document: bad JSON, wrong magic, truncated payload, bad RLE sums.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& message, std::string location = {})
        : Error("format", message, std::move(location)) {}
};

// Well-formed document that violates a semantic invariant (NaN depth, dims mismatch, ...).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message, std::string location = {})
        : Error("validation", message, std::move(location)) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message, std::string path = {})
        : Error("io", message, std::move(path)) {}
};

class SelectorError : public Error {
public:
    explicit SelectorError(const std::string& message) : Error("selector", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message, std::string location = {})
        : Error("config", message, std::move(location)) {}
};

class TransportError : public Error {
public:
    TransportError(const std::string& message, int status, std::string body)
        : Error("transport", message), status_(status), body_(std::move(body)) {}

    // HTTP status, or 0 when no response was received.
    int status() const noexcept { return status_; }
    // Response body truncated to at most 512 bytes.
    const std::string& body() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

class GenerationError : public Error {
public:
    explicit GenerationError(const std::string& message) : Error("generation", message) {}
};

// Raised when an internal invariant is broken; indicates a bug, not bad input.
class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& message) : Error("invariant", message) {}
};

}  // namespace symscene

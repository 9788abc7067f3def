#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aeq {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An algebraic precondition failed (broken bijection, non-homomorphism,
// invalid automorphism/cocycle table, partition inconsistency, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// A configured size cap was exceeded (group closure, product order, ...).
class CapacityError : public Error {
public:
    using Error::Error;
};

// Bad user-supplied configuration (unknown group spec, size mismatch, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input file; carries the byte offset where parsing failed.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t byte_offset)
        : Error(message + " (at byte " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

}  // namespace aeq

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace permtest {

/// Base class of every error raised by the library. The C API maps each
/// subclass onto one of the PT_ERR_* codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// A per-entry effect fell outside the statistic's declared range.
class InvalidStatisticError : public Error {
public:
    using Error::Error;
};

class EmptyDatasetError : public InvalidInputError {
public:
    EmptyDatasetError() : InvalidInputError("dataset is empty (N >= 1 required)") {}
};

/// u and v disagree on entry count or on an entry's length.
class AlignmentError : public InvalidInputError {
public:
    AlignmentError(std::size_t entry_index, const std::string& what)
        : InvalidInputError("alignment error at entry " + std::to_string(entry_index) + ": " + what),
          entry_index_(entry_index) {}

    std::size_t entry_index() const noexcept { return entry_index_; }

private:
    std::size_t entry_index_;
};

class ParseError : public InvalidInputError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : InvalidInputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A dense PMF would exceed the configured cell budget.
class ResourceLimitError : public Error {
public:
    using Error::Error;
};

/// brute_force refuses datasets whose 2^N enumeration is too large.
class OversizeError : public ResourceLimitError {
public:
    using ResourceLimitError::ResourceLimitError;
};

/// Broken internal invariant, e.g. an FFT cell far below zero.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace permtest

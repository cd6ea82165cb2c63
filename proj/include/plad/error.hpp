#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plad {

enum class ErrorKind {
    Argument,
    Dimension,
    InsufficientData,
    Numeric,
    Decode,
    UnsupportedFormat,
    Io,
    Lookup,
    Corruption,
    Framing,
    Unsupported,
    UndefinedMetric,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// PNG decode failure; `offset` is the number of input bytes consumed when
/// the decoder gave up.
class DecodeError : public Error {
public:
    DecodeError(std::size_t offset, const std::string& message);

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace plad

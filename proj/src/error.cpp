#include "plad/error.hpp"

namespace plad {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Argument: return "argument error";
        case ErrorKind::Dimension: return "dimension error";
        case ErrorKind::InsufficientData: return "insufficient data";
        case ErrorKind::Numeric: return "numeric error";
        case ErrorKind::Decode: return "decode error";
        case ErrorKind::UnsupportedFormat: return "unsupported format";
        case ErrorKind::Io: return "I/O error";
        case ErrorKind::Lookup: return "lookup error";
        case ErrorKind::Corruption: return "corruption error";
        case ErrorKind::Framing: return "framing error";
        case ErrorKind::Unsupported: return "unsupported";
        case ErrorKind::UndefinedMetric: return "undefined metric";
    }
    return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

DecodeError::DecodeError(std::size_t offset, const std::string& message)
    : Error(ErrorKind::Decode, message + " (at byte " + std::to_string(offset) + ")"),
      offset_(offset) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace plad

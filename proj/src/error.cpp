#include "geosearch/error.hpp"

namespace geosearch {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NetworkError: return "NETWORK_ERROR";
    case ErrorCode::MalformedResponse: return "MALFORMED_RESPONSE";
    case ErrorCode::SizeExceeded: return "SIZE_EXCEEDED";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::InvalidGeojson: return "INVALID_GEOJSON";
    case ErrorCode::NoCoordinates: return "NO_COORDINATES";
    case ErrorCode::PlaceNotFound: return "PLACE_NOT_FOUND";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::InvalidCombination: return "INVALID_COMBINATION";
    case ErrorCode::MalformedDb: return "MALFORMED_DB";
    case ErrorCode::InvalidCutoff: return "INVALID_CUTOFF";
    case ErrorCode::InsufficientData: return "INSUFFICIENT_DATA";
    case ErrorCode::ZeroMean: return "ZERO_MEAN";
    case ErrorCode::UnknownStrategy: return "UNKNOWN_STRATEGY";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           std::optional<std::size_t> line) {
  std::string out{to_string(code)};
  if (line) out += "(" + std::to_string(*line) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(format_message(code, message, line)),
      code_(code),
      line_(line) {}

}  // namespace geosearch

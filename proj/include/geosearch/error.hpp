#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace geosearch {

enum class ErrorCode {
  NetworkError,
  MalformedResponse,
  SizeExceeded,
  NotFound,
  IoError,
  ParseError,
  InvalidGeojson,
  NoCoordinates,
  PlaceNotFound,
  EmptyInput,
  InvalidCombination,
  MalformedDb,
  InvalidCutoff,
  InsufficientData,
  ZeroMean,
  UnknownStrategy,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. Line-oriented parsers also
/// attach the 1-based line number of the offending input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace geosearch

#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace geosearch {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string target = "/";  // path plus query

  /// "scheme://host:port", the form cpp-httplib's Client expects.
  std::string origin() const;
};

std::optional<Url> parse_url(std::string_view url);

/// Percent-encodes everything outside RFC 3986's unreserved set.
std::string url_encode(std::string_view s);

/// Attempts and base delay; the delay doubles after each failed attempt.
struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

struct HttpOptions {
  RetryPolicy retry;
  std::chrono::seconds timeout{30};
  std::optional<std::size_t> size_cap;  // abort the transfer beyond this many bytes
};

/// GET with bounded retries on transport failures and 5xx responses.
/// Throws Error(NotFound) on 404, Error(SizeExceeded) when the body passes
/// size_cap and Error(NetworkError) once retries are exhausted. Other
/// statuses are returned to the caller.
HttpResponse http_get(const std::string& url, const HttpOptions& options = {});

}  // namespace geosearch

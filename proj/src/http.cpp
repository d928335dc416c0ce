#include "geosearch/http.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cctype>
#include <thread>

#include "geosearch/error.hpp"

namespace geosearch {

std::string Url::origin() const {
  return scheme + "://" + host + ":" + std::to_string(port);
}

std::optional<Url> parse_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) return std::nullopt;
  Url out;
  out.scheme = std::string(url.substr(0, scheme_end));
  for (auto& c : out.scheme) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (out.scheme != "http" && out.scheme != "https") return std::nullopt;

  auto rest = url.substr(scheme_end + 3);
  const auto path_start = rest.find_first_of("/?");
  auto authority = rest.substr(0, path_start);
  out.target = path_start == std::string_view::npos ? "/" : std::string(rest.substr(path_start));
  if (!out.target.empty() && out.target.front() == '?') out.target.insert(0, "/");

  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority = authority.substr(at + 1);
  }
  out.port = out.scheme == "https" ? 443 : 80;
  if (const auto colon = authority.rfind(':');
      colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    const auto port_str = authority.substr(colon + 1);
    int port = 0;
    for (char c : port_str) {
      if (c < '0' || c > '9') return std::nullopt;
      port = port * 10 + (c - '0');
      if (port > 65535) return std::nullopt;
    }
    if (port_str.empty()) return std::nullopt;
    out.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) return std::nullopt;
  out.host = std::string(authority);
  return out;
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

HttpResponse http_get(const std::string& url, const HttpOptions& options) {
  const auto parsed = parse_url(url);
  if (!parsed) throw Error(ErrorCode::InvalidArgument, "not an http(s) URL: " + url);

  auto delay = options.retry.initial_backoff;
  std::string last_error;
  const int attempts = std::max(1, options.retry.attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(parsed->origin());
    client.set_follow_location(true);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);

    HttpResponse response;
    bool oversized = false;
    auto result = client.Get(
        parsed->target,
        [&](const httplib::Response& r) {
          response.status = r.status;
          return true;
        },
        [&](const char* data, std::size_t len) {
          if (options.size_cap && response.body.size() + len > *options.size_cap) {
            oversized = true;
            return false;
          }
          response.body.append(data, len);
          return true;
        });

    if (oversized) {
      throw Error(ErrorCode::SizeExceeded,
                  url + " exceeds " + std::to_string(*options.size_cap) + " bytes");
    }
    if (result) {
      if (response.status == 404) throw Error(ErrorCode::NotFound, url);
      if (response.status < 500) return response;
      last_error = "HTTP " + std::to_string(response.status);
    } else {
      last_error = httplib::to_string(result.error());
    }
    if (attempt < attempts) {
      spdlog::warn("GET {} failed ({}), retry {}/{} in {} ms", url, last_error, attempt,
                   attempts - 1, delay.count());
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  throw Error(ErrorCode::NetworkError, url + ": " + last_error);
}

}  // namespace geosearch

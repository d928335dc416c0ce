#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geosearch/corpus.hpp"
#include "geosearch/http.hpp"

namespace geosearch {

/// A CKAN portal to harvest.
struct PortalSource {
  std::string base_url;
  std::string country_hint;  // ISO-3166 alpha-2
  std::size_t page_size = 100;
  std::size_t max_records = 1000;

  void validate() const;
};

/// package_search URL for one page.
std::string ckan_search_url(const PortalSource& source, std::string_view format_filter,
                            std::size_t offset);

/// Supplies raw package_search response bodies. std::nullopt means the
/// source has no page at that offset.
class PageSource {
 public:
  virtual ~PageSource() = default;
  virtual std::optional<std::string> page(const PortalSource& source,
                                          std::string_view format_filter,
                                          std::size_t offset) = 0;
};

class CkanHttpPageSource final : public PageSource {
 public:
  explicit CkanHttpPageSource(HttpOptions options = {}) : options_(std::move(options)) {}
  std::optional<std::string> page(const PortalSource& source, std::string_view format_filter,
                                  std::size_t offset) override;

 private:
  HttpOptions options_;
};

/// Reads saved responses named page_{offset}.json from a directory.
class FixturePageSource final : public PageSource {
 public:
  explicit FixturePageSource(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::optional<std::string> page(const PortalSource& source, std::string_view format_filter,
                                  std::size_t offset) override;

 private:
  std::filesystem::path dir_;
};

struct HarvestStats {
  std::size_t emitted = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t filtered_out = 0;
  std::size_t pages = 0;
  std::size_t reported_count = 0;  // result.count of the first page

  /// Zero matching datasets. A signal for the caller, not a failure.
  bool empty_portal() const noexcept { return emitted == 0; }
};

/// Converts one CKAN package object. Returns std::nullopt when the package
/// lacks an id or title. The bbox comes from the package's own spatial
/// metadata when present.
std::optional<DatasetRecord> record_from_ckan_package(const nlohmann::json& package,
                                                      std::string_view portal);

/// Pages through package_search, emitting every dataset with at least one
/// resource whose format equals `format_filter` (case-insensitive). Stops at
/// max_records or when the portal runs out. Throws Error(MalformedResponse)
/// on an unparseable page; transport errors propagate from the page source.
HarvestStats harvest_portal(const PortalSource& source, std::string_view format_filter,
                            PageSource& pages,
                            const std::function<void(DatasetRecord)>& sink);

struct HarvestResult {
  std::vector<DatasetRecord> records;  // sorted by id
  HarvestStats stats;
};

HarvestResult harvest_portal(const PortalSource& source, std::string_view format_filter,
                             PageSource& pages);

struct FetchOptions {
  HttpOptions http;
  /// When set, http(s) URLs resolve to {fixture_root}/resources/{host}{path}
  /// and nothing goes over the network.
  std::optional<std::filesystem::path> fixture_root;
};

inline constexpr std::size_t kDefaultResourceCap = 10u * 1024u * 1024u;

/// Downloads a resource body. Accepts http(s) URLs, file:// URLs and plain
/// paths. Throws Error(SizeExceeded), Error(NotFound) or Error(NetworkError).
std::string fetch_resource(std::string_view url, std::size_t size_cap,
                           const FetchOptions& options = {});

}  // namespace geosearch

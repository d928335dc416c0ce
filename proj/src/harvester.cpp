#include "geosearch/harvester.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "geosearch/error.hpp"
#include "geosearch/spatial_enhancer.hpp"

namespace geosearch {

namespace fs = std::filesystem;

void PortalSource::validate() const {
  if (base_url.empty() || !parse_url(base_url)) {
    throw Error(ErrorCode::InvalidArgument, "portal base_url is not a URL: " + base_url);
  }
  if (page_size < 1) throw Error(ErrorCode::InvalidArgument, "page_size must be >= 1");
  if (max_records < 1) throw Error(ErrorCode::InvalidArgument, "max_records must be >= 1");
}

std::string ckan_search_url(const PortalSource& source, std::string_view format_filter,
                            std::size_t offset) {
  std::string base = source.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + "/api/3/action/package_search?q=&rows=" + std::to_string(source.page_size) +
         "&start=" + std::to_string(offset) + "&fq=res_format:" + url_encode(format_filter);
}

std::optional<std::string> CkanHttpPageSource::page(const PortalSource& source,
                                                    std::string_view format_filter,
                                                    std::size_t offset) {
  const auto url = ckan_search_url(source, format_filter, offset);
  auto response = http_get(url, options_);
  if (response.status != 200) {
    throw Error(ErrorCode::MalformedResponse,
                url + " returned HTTP " + std::to_string(response.status));
  }
  return std::move(response.body);
}

std::optional<std::string> FixturePageSource::page(const PortalSource&, std::string_view,
                                                   std::size_t offset) {
  const auto path = dir_ / ("page_" + std::to_string(offset) + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::string string_or_empty(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object()) return {};
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

std::optional<double> number_field(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const auto s = v.get<std::string>();
      double d = std::stod(s, &used);
      if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

// Extent stated by the portal itself: a "spatial" field or extra holding
// GeoJSON, or the bbox-{west,east}-long / bbox-{south,north}-lat extras.
std::optional<BBox> portal_extent(const nlohmann::json& package) {
  std::map<std::string, nlohmann::json> extras;
  if (auto it = package.find("extras"); it != package.end() && it->is_array()) {
    for (const auto& extra : *it) {
      auto key = string_or_empty(extra, "key");
      if (!key.empty() && extra.contains("value")) extras[key] = extra.at("value");
    }
  }
  std::optional<nlohmann::json> spatial;
  if (auto it = package.find("spatial"); it != package.end() && !it->is_null()) {
    spatial = *it;
  } else if (auto ex = extras.find("spatial"); ex != extras.end()) {
    spatial = ex->second;
  }
  if (spatial) {
    try {
      if (spatial->is_string()) return envelope_from_geojson(std::string_view(spatial->get<std::string>()));
      if (spatial->is_object()) return envelope_from_geojson(*spatial);
    } catch (const Error& e) {
      spdlog::debug("ignoring unusable spatial metadata: {}", e.what());
    }
  }
  const char* keys[] = {"bbox-west-long", "bbox-east-long", "bbox-south-lat", "bbox-north-lat"};
  std::optional<double> v[4];
  for (int i = 0; i < 4; ++i) {
    if (auto ex = extras.find(keys[i]); ex != extras.end()) v[i] = number_field(ex->second);
  }
  if (v[0] && v[1] && v[2] && v[3]) {
    BBox box{*v[0], *v[1], *v[2], *v[3]};
    if (box.valid()) return box;
  }
  return std::nullopt;
}

bool has_format(const DatasetRecord& record, std::string_view filter_upper) {
  return std::any_of(record.resource_urls.begin(), record.resource_urls.end(),
                     [&](const ResourceRef& r) { return r.format == filter_upper; });
}

}  // namespace

std::optional<DatasetRecord> record_from_ckan_package(const nlohmann::json& package,
                                                      std::string_view portal) {
  if (!package.is_object()) return std::nullopt;
  DatasetRecord record;
  record.id = string_or_empty(package, "id");
  if (record.id.empty()) record.id = string_or_empty(package, "name");
  record.title = string_or_empty(package, "title");
  if (record.id.empty() || record.title.empty()) return std::nullopt;
  record.description = string_or_empty(package, "notes");
  record.portal = std::string(portal);

  if (auto it = package.find("tags"); it != package.end() && it->is_array()) {
    for (const auto& tag : *it) {
      std::string name = tag.is_string() ? tag.get<std::string>() : string_or_empty(tag, "name");
      if (name.empty()) name = string_or_empty(tag, "display_name");
      if (!name.empty()) record.tags.push_back(std::move(name));
    }
  }
  if (auto it = package.find("resources"); it != package.end() && it->is_array()) {
    for (const auto& res : *it) {
      auto url = string_or_empty(res, "url");
      if (url.empty()) continue;
      record.resource_urls.push_back({std::move(url), uppercase_ascii(string_or_empty(res, "format"))});
    }
  }
  if (auto extent = portal_extent(package)) {
    record.bbox = extent;
    record.bbox_provenance = BBoxProvenance::PortalMetadata;
  }
  return record;
}

HarvestStats harvest_portal(const PortalSource& source, std::string_view format_filter,
                            PageSource& pages,
                            const std::function<void(DatasetRecord)>& sink) {
  source.validate();
  const std::string filter = uppercase_ascii(format_filter);
  HarvestStats stats;
  std::unordered_set<std::string> seen;
  std::size_t offset = 0;

  while (stats.emitted < source.max_records) {
    auto body = pages.page(source, format_filter, offset);
    if (!body) break;
    nlohmann::json doc;
    std::size_t count = 0;
    try {
      doc = nlohmann::json::parse(*body);
      if (!doc.at("success").get<bool>()) throw std::runtime_error("success=false");
      count = doc.at("result").at("count").get<std::size_t>();
      if (!doc.at("result").at("results").is_array()) throw std::runtime_error("results");
    } catch (const std::exception& e) {
      throw Error(ErrorCode::MalformedResponse,
                  "page at offset " + std::to_string(offset) + ": " + e.what());
    }
    if (stats.pages++ == 0) stats.reported_count = count;

    const auto& results = doc["result"]["results"];
    for (const auto& package : results) {
      if (stats.emitted >= source.max_records) break;
      auto record = record_from_ckan_package(package, source.base_url);
      if (!record || !has_format(*record, filter)) {
        ++stats.filtered_out;
        continue;
      }
      if (!seen.insert(record->id).second) {
        ++stats.duplicates_dropped;
        continue;
      }
      ++stats.emitted;
      sink(std::move(*record));
    }
    offset += results.size();
    if (results.empty() || offset >= count) break;
  }
  if (stats.empty_portal()) {
    spdlog::info("EMPTY_PORTAL: {} has no datasets with {} resources", source.base_url, filter);
  }
  return stats;
}

HarvestResult harvest_portal(const PortalSource& source, std::string_view format_filter,
                             PageSource& pages) {
  HarvestResult out;
  out.stats = harvest_portal(source, format_filter, pages,
                             [&](DatasetRecord r) { out.records.push_back(std::move(r)); });
  std::sort(out.records.begin(), out.records.end(),
            [](const DatasetRecord& a, const DatasetRecord& b) { return a.id < b.id; });
  return out;
}

namespace {

std::string read_capped_file(const fs::path& path, std::size_t size_cap) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::NotFound, path.string());
  const auto size = fs::file_size(path, ec);
  if (ec) throw Error(ErrorCode::NotFound, path.string());
  if (size > size_cap) {
    throw Error(ErrorCode::SizeExceeded,
                path.string() + " exceeds " + std::to_string(size_cap) + " bytes");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, path.string());
  std::string body(size, '\0');
  in.read(body.data(), static_cast<std::streamsize>(size));
  body.resize(static_cast<std::size_t>(in.gcount()));
  return body;
}

}  // namespace

std::string fetch_resource(std::string_view url, std::size_t size_cap,
                           const FetchOptions& options) {
  if (url.starts_with("file://")) return read_capped_file(fs::path(url.substr(7)), size_cap);
  const auto parsed = parse_url(url);
  if (!parsed) return read_capped_file(fs::path(url), size_cap);

  if (options.fixture_root) {
    auto target = parsed->target.substr(0, parsed->target.find('?'));
    while (!target.empty() && target.front() == '/') target.erase(0, 1);
    return read_capped_file(*options.fixture_root / "resources" / parsed->host / target,
                            size_cap);
  }
  HttpOptions http = options.http;
  http.size_cap = size_cap;
  auto response = http_get(std::string(url), http);
  if (response.status >= 400) {
    throw Error(ErrorCode::NotFound, std::string(url) + " returned HTTP " +
                                         std::to_string(response.status));
  }
  return std::move(response.body);
}

}  // namespace geosearch

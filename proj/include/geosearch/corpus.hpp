#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geosearch/bbox.hpp"

namespace geosearch {

/// Which enhancement tier produced a record's bbox.
enum class BBoxProvenance { GeojsonEnvelope, PlaceName, PortalCountry, PortalMetadata, None };

std::string_view to_string(BBoxProvenance p) noexcept;
std::optional<BBoxProvenance> parse_provenance(std::string_view s) noexcept;

struct ResourceRef {
  std::string url;
  std::string format;  // uppercase

  bool operator==(const ResourceRef&) const = default;
};

/// One harvested dataset surrogate plus its spatial extent.
struct DatasetRecord {
  std::string id;
  std::string title;
  std::string description;
  std::vector<std::string> tags;
  std::string portal;
  std::vector<ResourceRef> resource_urls;
  std::optional<BBox> bbox;
  BBoxProvenance bbox_provenance = BBoxProvenance::None;

  /// Throws Error(InvalidArgument) when an invariant is broken.
  void validate() const;

  bool operator==(const DatasetRecord&) const = default;
};

void to_json(nlohmann::json& j, const DatasetRecord& r);
void from_json(const nlohmann::json& j, DatasetRecord& r);

std::string uppercase_ascii(std::string_view s);

/// Writes one JSON object per line, overwriting `path`. Returns the count.
std::size_t write_corpus(std::span<const DatasetRecord> records,
                         const std::filesystem::path& path);

/// Throws Error(IoError) or Error(ParseError, line) on the first bad line.
std::vector<DatasetRecord> read_corpus(const std::filesystem::path& path);

}  // namespace geosearch

#include "geosearch/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "geosearch/error.hpp"

namespace geosearch {

namespace {

struct ProvenanceName {
  BBoxProvenance value;
  std::string_view name;
};

constexpr ProvenanceName kProvenanceNames[] = {
    {BBoxProvenance::GeojsonEnvelope, "GEOJSON_ENVELOPE"},
    {BBoxProvenance::PlaceName, "PLACE_NAME"},
    {BBoxProvenance::PortalCountry, "PORTAL_COUNTRY"},
    {BBoxProvenance::PortalMetadata, "PORTAL_METADATA"},
    {BBoxProvenance::None, "NONE"},
};

}  // namespace

std::string_view to_string(BBoxProvenance p) noexcept {
  for (const auto& [value, name] : kProvenanceNames) {
    if (value == p) return name;
  }
  return "NONE";
}

std::optional<BBoxProvenance> parse_provenance(std::string_view s) noexcept {
  for (const auto& [value, name] : kProvenanceNames) {
    if (name == s) return value;
  }
  return std::nullopt;
}

std::string uppercase_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

void DatasetRecord::validate() const {
  if (id.empty()) throw Error(ErrorCode::InvalidArgument, "record id is empty");
  if (title.empty()) throw Error(ErrorCode::InvalidArgument, "record " + id + " has no title");
  if (bbox && bbox_provenance == BBoxProvenance::None) {
    throw Error(ErrorCode::InvalidArgument, "record " + id + " has a bbox without provenance");
  }
  if (bbox && !bbox->valid()) {
    throw Error(ErrorCode::InvalidArgument, "record " + id + " has an invalid bbox");
  }
  for (const auto& res : resource_urls) {
    if (res.format != uppercase_ascii(res.format)) {
      throw Error(ErrorCode::InvalidArgument, "resource format not uppercase: " + res.format);
    }
  }
}

void to_json(nlohmann::json& j, const DatasetRecord& r) {
  nlohmann::json resources = nlohmann::json::array();
  for (const auto& res : r.resource_urls) {
    resources.push_back({{"url", res.url}, {"format", res.format}});
  }
  j = nlohmann::json{{"id", r.id},
                     {"title", r.title},
                     {"description", r.description},
                     {"tags", r.tags},
                     {"portal", r.portal},
                     {"resource_urls", std::move(resources)},
                     {"bbox", r.bbox ? nlohmann::json(*r.bbox) : nlohmann::json(nullptr)},
                     {"bbox_provenance", to_string(r.bbox_provenance)}};
}

void from_json(const nlohmann::json& j, DatasetRecord& r) {
  r.id = j.at("id").get<std::string>();
  r.title = j.at("title").get<std::string>();
  r.description = j.value("description", std::string{});
  r.tags = j.value("tags", std::vector<std::string>{});
  r.portal = j.value("portal", std::string{});
  r.resource_urls.clear();
  if (j.contains("resource_urls")) {
    for (const auto& res : j.at("resource_urls")) {
      r.resource_urls.push_back(
          {res.at("url").get<std::string>(), uppercase_ascii(res.at("format").get<std::string>())});
    }
  }
  const auto& bbox = j.contains("bbox") ? j.at("bbox") : nlohmann::json(nullptr);
  r.bbox = bbox.is_null() ? std::nullopt : std::optional<BBox>(bbox.get<BBox>());
  const auto prov = parse_provenance(j.value("bbox_provenance", std::string("NONE")));
  if (!prov) throw Error(ErrorCode::InvalidArgument, "unknown bbox_provenance");
  r.bbox_provenance = *prov;
  r.validate();
}

std::size_t write_corpus(std::span<const DatasetRecord> records,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  for (const auto& record : records) {
    out << nlohmann::json(record).dump() << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
  return records.size();
}

std::vector<DatasetRecord> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      records.push_back(nlohmann::json::parse(line).get<DatasetRecord>());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ParseError, e.what(), line_no);
    }
  }
  return records;
}

}  // namespace geosearch

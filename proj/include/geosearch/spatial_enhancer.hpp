#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geosearch/bbox.hpp"
#include "geosearch/corpus.hpp"
#include "geosearch/harvester.hpp"
#include "geosearch/http.hpp"

namespace geosearch {

// ---------------------------------------------------------------------------
// GeoJSON

/// Envelope of every position in a GeoJSON Feature, FeatureCollection,
/// GeometryCollection or bare geometry. A top-level "bbox" member wins over
/// the coordinates. Throws Error(InvalidGeojson) for unparseable input or
/// out-of-range coordinates and Error(NoCoordinates) for empty geometry.
BBox envelope_from_geojson(std::string_view bytes);
BBox envelope_from_geojson(const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// Gazetteer

struct GazetteerEntry {
  std::string name;
  std::vector<std::string> aliases;
  BBox bbox;
};

void to_json(nlohmann::json& j, const GazetteerEntry& e);
void from_json(const nlohmann::json& j, GazetteerEntry& e);

/// Lowercases ASCII and collapses whitespace runs to a single space.
std::string fold_place(std::string_view s);

struct PlaceMatch {
  std::string name;  // the entry's name, not the alias that matched
  BBox bbox;

  bool operator==(const PlaceMatch&) const = default;
};

/// Local place-name table with a token-sequence index for matching.
class Gazetteer {
 public:
  Gazetteer() = default;
  explicit Gazetteer(std::vector<GazetteerEntry> entries);

  /// JSON array of {"name","aliases","bbox"}.
  static Gazetteer load(const std::filesystem::path& path);

  const std::vector<GazetteerEntry>& entries() const noexcept { return entries_; }

  /// Exact case-folded match on a name or alias.
  const GazetteerEntry* find(std::string_view place) const;

  /// Longest token-aligned match scan over `text`, left to right.
  std::vector<PlaceMatch> scan(std::string_view text) const;

 private:
  std::vector<GazetteerEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_key_;  // folded token sequence -> entry
  std::size_t longest_key_tokens_ = 0;
};

/// Scans title then description; results deduplicated by entry name in
/// discovery order.
std::vector<PlaceMatch> extract_place_names(std::string_view title,
                                            std::string_view description,
                                            const Gazetteer& gazetteer);

// ---------------------------------------------------------------------------
// Geocoding

/// Remote geocoder behind the gazetteer. Returns std::nullopt when the
/// service has no match; throws Error(NetworkError) when unreachable.
class Geocoder {
 public:
  virtual ~Geocoder() = default;
  virtual std::optional<BBox> lookup(std::string_view place) = 0;
};

/// Nominatim-style search client with an on-disk response cache. Cache
/// files are named by the SHA-256 of the folded query and written
/// atomically.
class NominatimGeocoder final : public Geocoder {
 public:
  struct Options {
    std::string base_url = "https://nominatim.openstreetmap.org";
    std::filesystem::path cache_dir;
    HttpOptions http;
  };

  explicit NominatimGeocoder(Options options);
  std::optional<BBox> lookup(std::string_view place) override;

  /// Parses a search response: first element's "boundingbox" is
  /// [min_lat, max_lat, min_lon, max_lon].
  static std::optional<BBox> parse_response(std::string_view body);

 private:
  Options options_;
};

/// Gazetteer first, then the remote geocoder if one is configured.
/// Throws Error(PlaceNotFound) when neither resolves the place.
BBox geocode(std::string_view place, const Gazetteer& gazetteer, Geocoder* remote = nullptr);

// ---------------------------------------------------------------------------
// Enhancement cascade

/// ISO-3166 alpha-2 code from the portal's host name ("data.gov.ie" -> "IE",
/// bare "data.gov" -> "US"). Empty when unknown.
std::string country_from_portal(std::string_view portal_url);

/// Country name the gazetteer knows for an alpha-2 code, or the code itself.
std::string country_name(std::string_view alpha2);

/// Assigns a bbox through the tier cascade: existing metadata, GeoJSON
/// envelope, first place name in title/description, portal country. A
/// record that already has a bbox is returned unchanged. When every tier
/// fails the bbox stays empty with provenance NONE.
DatasetRecord enhance(DatasetRecord record, const std::optional<std::string>& geojson,
                      const Gazetteer& gazetteer, Geocoder* remote = nullptr,
                      std::string_view country_hint = {});

struct EnhanceStats {
  std::map<BBoxProvenance, std::size_t> by_provenance;
  std::size_t fetch_failures = 0;
};

/// Runs enhance() over a corpus. GeoJSON resources of records without a
/// bbox are fetched with up to `jobs` downloads in flight; a failed fetch
/// falls through to the next tier. Output order matches input order.
std::vector<DatasetRecord> enhance_corpus(std::vector<DatasetRecord> records,
                                          const Gazetteer& gazetteer, Geocoder* remote,
                                          const FetchOptions& fetch, std::size_t jobs = 4,
                                          std::string_view country_hint = {},
                                          EnhanceStats* stats = nullptr);

}  // namespace geosearch

#include "geosearch/spatial_enhancer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "geosearch/error.hpp"
#include "geosearch/files.hpp"

namespace geosearch {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// GeoJSON

namespace {

struct EnvelopeAccumulator {
  double min_x = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();
  bool any = false;

  void add(double x, double y) {
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
    any = true;
  }
};

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidGeojson, why); }

// Coordinates nest to any depth; a position is an array starting with a number.
void collect_positions(const nlohmann::json& coords, EnvelopeAccumulator& acc) {
  if (!coords.is_array()) invalid("coordinates must be arrays");
  if (coords.empty()) return;
  if (coords.front().is_number()) {
    if (coords.size() < 2 || !coords[1].is_number()) invalid("position needs two numbers");
    acc.add(coords[0].get<double>(), coords[1].get<double>());
    return;
  }
  for (const auto& child : coords) collect_positions(child, acc);
}

void visit(const nlohmann::json& obj, EnvelopeAccumulator& acc) {
  if (!obj.is_object()) invalid("GeoJSON object expected");
  auto type_it = obj.find("type");
  if (type_it == obj.end() || !type_it->is_string()) invalid("missing \"type\"");
  const auto type = type_it->get<std::string>();

  if (type == "FeatureCollection") {
    auto it = obj.find("features");
    if (it == obj.end() || !it->is_array()) invalid("FeatureCollection without features");
    for (const auto& feature : *it) visit(feature, acc);
  } else if (type == "Feature") {
    auto it = obj.find("geometry");
    if (it != obj.end() && !it->is_null()) visit(*it, acc);
  } else if (type == "GeometryCollection") {
    auto it = obj.find("geometries");
    if (it == obj.end() || !it->is_array()) invalid("GeometryCollection without geometries");
    for (const auto& geometry : *it) visit(geometry, acc);
  } else if (type == "Point" || type == "MultiPoint" || type == "LineString" ||
             type == "MultiLineString" || type == "Polygon" || type == "MultiPolygon") {
    auto it = obj.find("coordinates");
    if (it == obj.end()) invalid(type + " without coordinates");
    collect_positions(*it, acc);
  } else {
    invalid("unknown GeoJSON type " + type);
  }
}

BBox checked_box(double min_x, double max_x, double min_y, double max_y) {
  BBox box{min_x, max_x, min_y, max_y};
  if (min_x > max_x) invalid("envelope crosses the antimeridian");
  if (!box.valid()) invalid("coordinates outside geographic range");
  return box;
}

}  // namespace

BBox envelope_from_geojson(const nlohmann::json& doc) {
  if (!doc.is_object()) invalid("GeoJSON object expected");
  if (auto it = doc.find("bbox"); it != doc.end() && it->is_array()) {
    const auto& b = *it;
    if ((b.size() != 4 && b.size() != 6) ||
        !std::all_of(b.begin(), b.end(), [](const auto& v) { return v.is_number(); })) {
      invalid("bbox member must hold 4 or 6 numbers");
    }
    const std::size_t dims = b.size() / 2;
    return checked_box(b[0].get<double>(), b[dims].get<double>(), b[1].get<double>(),
                       b[dims + 1].get<double>());
  }
  EnvelopeAccumulator acc;
  visit(doc, acc);
  if (!acc.any) throw Error(ErrorCode::NoCoordinates, "GeoJSON has no coordinates");
  return checked_box(acc.min_x, acc.max_x, acc.min_y, acc.max_y);
}

BBox envelope_from_geojson(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    invalid(e.what());
  }
  return envelope_from_geojson(doc);
}

// ---------------------------------------------------------------------------
// Gazetteer

void to_json(nlohmann::json& j, const GazetteerEntry& e) {
  j = nlohmann::json{{"name", e.name}, {"aliases", e.aliases}, {"bbox", e.bbox}};
}

void from_json(const nlohmann::json& j, GazetteerEntry& e) {
  e.name = j.at("name").get<std::string>();
  e.aliases = j.value("aliases", std::vector<std::string>{});
  e.bbox = j.at("bbox").get<BBox>();
  if (e.name.empty()) throw Error(ErrorCode::InvalidArgument, "gazetteer entry without name");
}

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::vector<std::string> place_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t from, std::size_t n) {
  std::string key;
  for (std::size_t i = from; i < from + n; ++i) {
    if (i > from) key.push_back(' ');
    key += tokens[i];
  }
  return key;
}

}  // namespace

std::string fold_place(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto add_key = [&](const std::string& label) {
      const auto tokens = place_tokens(label);
      if (tokens.empty()) return;
      // First entry wins when two entries share a label.
      by_key_.emplace(join_tokens(tokens, 0, tokens.size()), i);
      longest_key_tokens_ = std::max(longest_key_tokens_, tokens.size());
    };
    add_key(entries_[i].name);
    for (const auto& alias : entries_[i].aliases) add_key(alias);
  }
}

Gazetteer Gazetteer::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open gazetteer " + path.string());
  try {
    return Gazetteer(nlohmann::json::parse(in).get<std::vector<GazetteerEntry>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "gazetteer " + path.string() + ": " + e.what());
  }
}

const GazetteerEntry* Gazetteer::find(std::string_view place) const {
  const auto tokens = place_tokens(place);
  if (tokens.empty()) return nullptr;
  auto it = by_key_.find(join_tokens(tokens, 0, tokens.size()));
  return it == by_key_.end() ? nullptr : &entries_[it->second];
}

std::vector<PlaceMatch> Gazetteer::scan(std::string_view text) const {
  std::vector<PlaceMatch> out;
  const auto tokens = place_tokens(text);
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t matched = 0;
    for (std::size_t n = std::min(longest_key_tokens_, tokens.size() - i); n >= 1; --n) {
      auto it = by_key_.find(join_tokens(tokens, i, n));
      if (it != by_key_.end()) {
        const auto& entry = entries_[it->second];
        out.push_back({entry.name, entry.bbox});
        matched = n;
        break;
      }
    }
    i += matched > 0 ? matched : 1;
  }
  return out;
}

std::vector<PlaceMatch> extract_place_names(std::string_view title,
                                            std::string_view description,
                                            const Gazetteer& gazetteer) {
  std::vector<PlaceMatch> out;
  std::unordered_set<std::string> seen;
  for (auto text : {title, description}) {
    for (auto& match : gazetteer.scan(text)) {
      if (seen.insert(match.name).second) out.push_back(std::move(match));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geocoding

NominatimGeocoder::NominatimGeocoder(Options options) : options_(std::move(options)) {}

std::optional<BBox> NominatimGeocoder::parse_response(std::string_view body) {
  try {
    const auto doc = nlohmann::json::parse(body);
    if (!doc.is_array()) throw std::runtime_error("array expected");
    if (doc.empty()) return std::nullopt;
    const auto& bb = doc.front().at("boundingbox");
    if (!bb.is_array() || bb.size() != 4) throw std::runtime_error("boundingbox needs 4 values");
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
      v[i] = bb[i].is_string() ? std::stod(bb[i].get<std::string>()) : bb[i].get<double>();
    }
    // [min_lat, max_lat, min_lon, max_lon]
    return BBox::make(v[2], v[3], v[0], v[1]);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("geocoder response: ") + e.what());
  }
}

std::optional<BBox> NominatimGeocoder::lookup(std::string_view place) {
  const auto folded = fold_place(place);
  fs::path cache_file;
  if (!options_.cache_dir.empty()) {
    cache_file = options_.cache_dir / (sha256_hex(folded) + ".json");
    if (auto cached = read_file(cache_file)) return parse_response(*cached);
  }
  std::string base = options_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  const auto url = base + "/search?q=" + url_encode(folded) + "&format=json&limit=1";
  const auto response = http_get(url, options_.http);
  if (response.status != 200) {
    throw Error(ErrorCode::NetworkError, url + " returned HTTP " + std::to_string(response.status));
  }
  auto result = parse_response(response.body);
  if (!cache_file.empty()) write_file_atomic(cache_file, response.body);
  return result;
}

BBox geocode(std::string_view place, const Gazetteer& gazetteer, Geocoder* remote) {
  if (fold_place(place).empty()) throw Error(ErrorCode::InvalidArgument, "empty place name");
  if (const auto* entry = gazetteer.find(place)) return entry->bbox;
  if (remote) {
    if (auto box = remote->lookup(place)) return *box;
  }
  throw Error(ErrorCode::PlaceNotFound, std::string(place));
}

// ---------------------------------------------------------------------------
// Enhancement cascade

std::string country_from_portal(std::string_view portal_url) {
  std::string host;
  if (auto url = parse_url(portal_url)) {
    host = url->host;
  } else {
    host = std::string(portal_url.substr(0, portal_url.find('/')));
  }
  for (auto& c : host) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto dot = host.rfind('.');
  if (dot == std::string::npos) return {};
  const auto tld = host.substr(dot + 1);
  if (tld == "gov" || tld == "us") return "US";
  if (tld == "uk") return "GB";
  if (tld.size() == 2 && std::all_of(tld.begin(), tld.end(), [](unsigned char c) {
        return std::isalpha(c);
      })) {
    return uppercase_ascii(tld);
  }
  return {};
}

std::string country_name(std::string_view alpha2) {
  static const std::map<std::string, std::string, std::less<>> kNames{
      {"AU", "Australia"},     {"CA", "Canada"},        {"DE", "Germany"},
      {"FR", "France"},        {"GB", "United Kingdom"}, {"IE", "Ireland"},
      {"NZ", "New Zealand"},   {"UK", "United Kingdom"}, {"US", "United States"},
  };
  const auto code = uppercase_ascii(alpha2);
  auto it = kNames.find(code);
  return it == kNames.end() ? code : it->second;
}

DatasetRecord enhance(DatasetRecord record, const std::optional<std::string>& geojson,
                      const Gazetteer& gazetteer, Geocoder* remote,
                      std::string_view country_hint) {
  if (record.bbox) return record;

  if (geojson) {
    try {
      record.bbox = envelope_from_geojson(std::string_view(*geojson));
      record.bbox_provenance = BBoxProvenance::GeojsonEnvelope;
      return record;
    } catch (const Error& e) {
      spdlog::debug("{}: GeoJSON envelope failed: {}", record.id, e.what());
    }
  }

  const auto places = extract_place_names(record.title, record.description, gazetteer);
  if (!places.empty()) {
    if (places.size() > 1) {
      std::string rest;
      for (std::size_t i = 1; i < places.size(); ++i) rest += (i > 1 ? ", " : "") + places[i].name;
      spdlog::debug("{}: using place '{}', alternatives: {}", record.id, places.front().name, rest);
    }
    record.bbox = places.front().bbox;
    record.bbox_provenance = BBoxProvenance::PlaceName;
    return record;
  }

  const std::string code =
      country_hint.empty() ? country_from_portal(record.portal) : std::string(country_hint);
  if (!code.empty()) {
    try {
      record.bbox = geocode(country_name(code), gazetteer, remote);
      record.bbox_provenance = BBoxProvenance::PortalCountry;
      return record;
    } catch (const Error& e) {
      spdlog::debug("{}: country fallback failed: {}", record.id, e.what());
    }
  }
  record.bbox.reset();
  record.bbox_provenance = BBoxProvenance::None;
  return record;
}

std::vector<DatasetRecord> enhance_corpus(std::vector<DatasetRecord> records,
                                          const Gazetteer& gazetteer, Geocoder* remote,
                                          const FetchOptions& fetch, std::size_t jobs,
                                          std::string_view country_hint, EnhanceStats* stats) {
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  std::mutex geocode_mutex;  // the remote geocoder is not reentrant

  auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      auto& record = records[i];
      if (record.bbox) continue;
      std::optional<std::string> geojson;
      for (const auto& res : record.resource_urls) {
        if (res.format != "GEOJSON") continue;
        try {
          geojson = fetch_resource(res.url, kDefaultResourceCap, fetch);
          break;
        } catch (const Error& e) {
          ++failures;
          spdlog::warn("{}: cannot fetch {}: {}", record.id, res.url, e.what());
        }
      }
      if (remote) {
        std::lock_guard lock(geocode_mutex);
        record = enhance(std::move(record), geojson, gazetteer, remote, country_hint);
      } else {
        record = enhance(std::move(record), geojson, gazetteer, nullptr, country_hint);
      }
    }
  };

  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, records.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  if (stats) {
    stats->fetch_failures = failures;
    for (const auto& r : records) ++stats->by_provenance[r.bbox_provenance];
  }
  return records;
}

}  // namespace geosearch

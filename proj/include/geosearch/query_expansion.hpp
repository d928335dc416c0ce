#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geosearch/http.hpp"
#include "geosearch/terms.hpp"

namespace geosearch {

enum class ExpansionSource { None, WordNet, ConceptNet };
enum class ExpansionMode { SynonymsOnly, Full };

std::string_view to_string(ExpansionSource s) noexcept;
std::string_view to_string(ExpansionMode m) noexcept;

struct ExpansionConfig {
  ExpansionSource source = ExpansionSource::None;
  ExpansionMode mode = ExpansionMode::SynonymsOnly;
  std::size_t max_terms_per_relation = 10;
};

/// Weight of a term reached through `relation` from `source`:
///   WordNet:    original 1.0, synonym 1.0, hypernym 0.8, hyponym 0.9
///   ConceptNet: original 1.0, synonym 1.0, IsA 0.9, MannerOf 0.9
/// Throws Error(InvalidCombination) for any other pairing.
double expansion_weight(ExpansionSource source, Relation relation);

/// Relations consulted for a source and mode, in output order.
std::vector<Relation> expansion_relations(ExpansionSource source, ExpansionMode mode);

struct ThesaurusEntry {
  std::string headword;
  std::vector<std::string> synonyms;
  std::vector<std::string> hypernyms;
  std::vector<std::string> hyponyms;

  bool operator==(const ThesaurusEntry&) const = default;
};

void to_json(nlohmann::json& j, const ThesaurusEntry& e);
void from_json(const nlohmann::json& j, ThesaurusEntry& e);

/// Candidate base forms of a noun, surface form first, following WordNet's
/// noun detachment rules ("communities" -> "community").
std::vector<std::string> noun_base_forms(std::string_view word);

/// Immutable headword -> relations map. The JSON form is an array of
/// {"headword","synonyms","hypernyms","hyponyms"} objects.
class Thesaurus {
 public:
  Thesaurus() = default;
  explicit Thesaurus(std::vector<ThesaurusEntry> entries);

  static Thesaurus load_json(const std::filesystem::path& path);
  static Thesaurus from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  /// Case-folded lookup, falling back to noun base forms.
  const ThesaurusEntry* find(std::string_view word) const;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, ThesaurusEntry>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, ThesaurusEntry> entries_;
};

/// Imports WordNet 3.x noun database files (index.noun, data.noun).
/// Synonyms are synset co-members, hypernyms follow "@" pointers and
/// hyponyms follow "~" pointers. Throws Error(MalformedDb, line).
Thesaurus parse_wordnet_db(std::string_view index_file, std::string_view data_file);

/// ConceptNet edge-query client. Responses are cached on disk as
/// {cache_dir}/{Relation}/{term}.json; a cache hit never touches the
/// network. Live requests run one at a time with a minimum spacing.
class ConceptNetClient {
 public:
  struct Options {
    std::string api_base = "https://api.conceptnet.io";
    std::filesystem::path cache_dir;
    bool offline = false;  // cache only; a miss is a NETWORK_ERROR
    std::chrono::milliseconds min_spacing{1000};
    std::size_t query_limit = 1000;
    HttpOptions http;
  };

  explicit ConceptNetClient(Options options);

  /// English labels at the far end of `relation` edges touching /c/en/{term},
  /// both directions, ordered by edge weight, deduplicated, at most `cap`.
  std::vector<std::string> lookup(std::string_view term, Relation relation, std::size_t cap);

  /// Edge-query URL for a term and relation.
  std::string query_url(std::string_view term, Relation relation) const;

  /// Parses an edge-query response body for `term`.
  static std::vector<std::string> parse_edges(std::string_view body, std::string_view term,
                                              std::size_t cap);

  std::size_t network_requests() const noexcept { return network_requests_; }

 private:
  std::filesystem::path cache_path(std::string_view term, Relation relation) const;

  Options options_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point last_request_{};
  std::size_t network_requests_ = 0;
};

/// ConceptNet node slug: lowercase, spaces to underscores.
std::string conceptnet_slug(std::string_view term);

struct ExpansionSources {
  const Thesaurus* wordnet = nullptr;
  ConceptNetClient* conceptnet = nullptr;
};

/// Weighted terms for surface tokens: each token as ORIGINAL (1.0) plus the
/// relations selected by `config`. Duplicates keep their largest weight.
/// Sorted by weight descending, then text. Terms may be multiword.
std::vector<WeightedTerm> expand(std::span<const std::string> theme_tokens,
                                 const ExpansionConfig& config, const ExpansionSources& sources);

}  // namespace geosearch

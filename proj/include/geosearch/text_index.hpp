#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geosearch/bbox.hpp"
#include "geosearch/corpus.hpp"
#include "geosearch/terms.hpp"

namespace geosearch {

/// Classic Porter stemmer (reference C implementation, including its
/// "bli" -> "ble" and "logi" -> "log" rules). Input must be lowercase;
/// words of one or two letters are returned unchanged.
std::string porter_stem(std::string_view word);

/// True for words in the Snowball English stop-word list.
bool is_stop_word(std::string_view token);

/// Lowercased tokens split on non-alphanumeric runs, stop words removed,
/// not stemmed. Bytes >= 0x80 count as word characters.
std::vector<std::string> surface_tokens(std::string_view text);

/// surface_tokens followed by Porter stemming, order preserved.
std::vector<std::string> preprocess(std::string_view text);

enum class Field : std::uint8_t { Title = 0, Tags = 1, Description = 2 };

std::string_view to_string(Field f) noexcept;

/// Title and tags carry weight A, description weight B.
struct FieldWeights {
  double weight_a = 1.0;
  double weight_b = 0.4;

  /// Throws Error(InvalidArgument) unless 0 < b <= a <= 1.
  void validate() const;
  double weight(Field f) const noexcept {
    return f == Field::Description ? weight_b : weight_a;
  }
};

struct Lexeme {
  std::string text;
  Field source_field = Field::Title;
  std::vector<std::uint32_t> positions;  // token offsets within the field
};

struct IndexedDocument {
  std::string dataset_id;
  std::map<std::string, std::vector<Lexeme>, std::less<>> lexemes;  // one Lexeme per field
  std::optional<BBox> bbox;

  std::uint32_t tf(std::string_view term, Field field) const;
  bool contains(std::string_view term) const;
};

IndexedDocument index_document(const DatasetRecord& record);

struct Posting {
  std::uint32_t doc = 0;  // position in Index::documents()
  Field field = Field::Title;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

/// Immutable inverted index over dataset surrogates.
class Index {
 public:
  static Index build(std::span<const DatasetRecord> records, FieldWeights weights = {});

  const FieldWeights& weights() const noexcept { return weights_; }
  const std::vector<IndexedDocument>& documents() const noexcept { return docs_; }
  std::span<const Posting> postings(std::string_view lexeme) const;
  std::size_t lexeme_count() const noexcept { return postings_.size(); }
  const IndexedDocument* find(std::string_view dataset_id) const;

  /// Binary format: "GSIX" magic, one version byte, then length-prefixed
  /// little-endian fields. Deterministic for a given corpus.
  void serialize(std::ostream& out) const;
  static Index deserialize(std::istream& in);

  static constexpr std::uint8_t kFormatVersion = 1;

 private:
  void rebuild_lookup();

  FieldWeights weights_;
  std::vector<IndexedDocument> docs_;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::unordered_map<std::string, std::uint32_t> by_id_;
};

/// Saturating, field-weighted score:
///   sum over distinct terms t of w(t) * sum over fields f of
///   field_weight(f) * tf / (tf + 1).
/// Repeated terms count once at their largest weight.
double text_score(const IndexedDocument& doc, std::span<const WeightedTerm> terms,
                  const FieldWeights& weights);

bool match_any(const IndexedDocument& doc, std::span<const std::string> terms);
bool match_all(const IndexedDocument& doc, std::span<const std::string> terms);

}  // namespace geosearch

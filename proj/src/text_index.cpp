#include "geosearch/text_index.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <istream>
#include <ostream>

#include "geosearch/error.hpp"

namespace geosearch {

std::string_view to_string(Field f) noexcept {
  switch (f) {
    case Field::Title: return "TITLE";
    case Field::Tags: return "TAGS";
    case Field::Description: return "DESCRIPTION";
  }
  return "TITLE";
}

std::vector<std::string> surface_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !is_stop_word(current)) tokens.push_back(current);
    current.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> preprocess(std::string_view text) {
  auto tokens = surface_tokens(text);
  for (auto& t : tokens) t = porter_stem(t);
  return tokens;
}

void FieldWeights::validate() const {
  if (!(weight_a > 0.0 && weight_a <= 1.0 && weight_b > 0.0 && weight_b <= weight_a)) {
    throw Error(ErrorCode::InvalidArgument, "field weights need 0 < B <= A <= 1");
  }
}

std::uint32_t IndexedDocument::tf(std::string_view term, Field field) const {
  auto it = lexemes.find(term);
  if (it == lexemes.end()) return 0;
  for (const auto& lex : it->second) {
    if (lex.source_field == field) return static_cast<std::uint32_t>(lex.positions.size());
  }
  return 0;
}

bool IndexedDocument::contains(std::string_view term) const {
  return lexemes.find(term) != lexemes.end();
}

namespace {

void add_field(IndexedDocument& doc, Field field, std::string_view text, std::uint32_t& pos) {
  for (auto& stem : preprocess(text)) {
    auto& list = doc.lexemes[stem];
    auto it = std::find_if(list.begin(), list.end(),
                           [&](const Lexeme& l) { return l.source_field == field; });
    if (it == list.end()) {
      list.push_back(Lexeme{stem, field, {}});
      it = std::prev(list.end());
    }
    it->positions.push_back(pos++);
  }
}

}  // namespace

IndexedDocument index_document(const DatasetRecord& record) {
  IndexedDocument doc;
  doc.dataset_id = record.id;
  doc.bbox = record.bbox;
  std::uint32_t pos = 0;
  add_field(doc, Field::Title, record.title, pos);
  pos = 0;
  for (const auto& tag : record.tags) add_field(doc, Field::Tags, tag, pos);
  pos = 0;
  add_field(doc, Field::Description, record.description, pos);
  for (auto& [text, list] : doc.lexemes) {
    std::sort(list.begin(), list.end(), [](const Lexeme& a, const Lexeme& b) {
      return a.source_field < b.source_field;
    });
  }
  return doc;
}

Index Index::build(std::span<const DatasetRecord> records, FieldWeights weights) {
  weights.validate();
  Index index;
  index.weights_ = weights;
  index.docs_.reserve(records.size());
  for (const auto& record : records) index.docs_.push_back(index_document(record));
  index.rebuild_lookup();
  return index;
}

void Index::rebuild_lookup() {
  postings_.clear();
  by_id_.clear();
  for (std::uint32_t d = 0; d < docs_.size(); ++d) {
    by_id_.emplace(docs_[d].dataset_id, d);
    for (const auto& [text, list] : docs_[d].lexemes) {
      auto& postings = postings_[text];
      for (const auto& lex : list) {
        postings.push_back({d, lex.source_field, static_cast<std::uint32_t>(lex.positions.size())});
      }
    }
  }
}

std::span<const Posting> Index::postings(std::string_view lexeme) const {
  auto it = postings_.find(lexeme);
  if (it == postings_.end()) return {};
  return it->second;
}

const IndexedDocument* Index::find(std::string_view dataset_id) const {
  auto it = by_id_.find(std::string(dataset_id));
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'G', 'S', 'I', 'X'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

void put_str(std::ostream& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint8_t get_u8(std::istream& in) {
  const int c = in.get();
  if (c == std::char_traits<char>::eof()) throw Error(ErrorCode::ParseError, "truncated index");
  return static_cast<std::uint8_t>(c);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(get_u8(in)) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(get_u8(in)) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string get_str(std::istream& in) {
  const auto n = get_u32(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (static_cast<std::uint32_t>(in.gcount()) != n) {
    throw Error(ErrorCode::ParseError, "truncated index");
  }
  return s;
}

}  // namespace

void Index::serialize(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  out.put(static_cast<char>(kFormatVersion));
  put_f64(out, weights_.weight_a);
  put_f64(out, weights_.weight_b);
  put_u32(out, static_cast<std::uint32_t>(docs_.size()));
  for (const auto& doc : docs_) {
    put_str(out, doc.dataset_id);
    out.put(doc.bbox ? 1 : 0);
    if (doc.bbox) {
      put_f64(out, doc.bbox->min_x);
      put_f64(out, doc.bbox->max_x);
      put_f64(out, doc.bbox->min_y);
      put_f64(out, doc.bbox->max_y);
    }
    put_u32(out, static_cast<std::uint32_t>(doc.lexemes.size()));
    for (const auto& [text, list] : doc.lexemes) {
      put_str(out, text);
      put_u32(out, static_cast<std::uint32_t>(list.size()));
      for (const auto& lex : list) {
        out.put(static_cast<char>(lex.source_field));
        put_u32(out, static_cast<std::uint32_t>(lex.positions.size()));
        for (auto p : lex.positions) put_u32(out, p);
      }
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "index write failed");
}

Index Index::deserialize(std::istream& in) {
  char magic[4] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() != 4 || !std::equal(magic, magic + 4, kMagic)) {
    throw Error(ErrorCode::ParseError, "not an index file");
  }
  if (const auto version = get_u8(in); version != kFormatVersion) {
    throw Error(ErrorCode::ParseError, "unsupported index version " + std::to_string(version));
  }
  Index index;
  index.weights_.weight_a = get_f64(in);
  index.weights_.weight_b = get_f64(in);
  index.weights_.validate();
  const auto ndocs = get_u32(in);
  for (std::uint32_t d = 0; d < ndocs; ++d) {
    IndexedDocument doc;
    doc.dataset_id = get_str(in);
    if (get_u8(in) != 0) {
      BBox box;
      box.min_x = get_f64(in);
      box.max_x = get_f64(in);
      box.min_y = get_f64(in);
      box.max_y = get_f64(in);
      if (!box.valid()) throw Error(ErrorCode::ParseError, "invalid bbox in index");
      doc.bbox = box;
    }
    const auto nlex = get_u32(in);
    for (std::uint32_t l = 0; l < nlex; ++l) {
      auto text = get_str(in);
      const auto nfields = get_u32(in);
      std::vector<Lexeme> list;
      for (std::uint32_t f = 0; f < nfields; ++f) {
        const auto field = get_u8(in);
        if (field > static_cast<std::uint8_t>(Field::Description)) {
          throw Error(ErrorCode::ParseError, "bad field tag in index");
        }
        Lexeme lex{text, static_cast<Field>(field), {}};
        const auto npos = get_u32(in);
        lex.positions.reserve(npos);
        for (std::uint32_t p = 0; p < npos; ++p) lex.positions.push_back(get_u32(in));
        list.push_back(std::move(lex));
      }
      doc.lexemes.emplace(std::move(text), std::move(list));
    }
    index.docs_.push_back(std::move(doc));
  }
  index.rebuild_lookup();
  return index;
}

// ---------------------------------------------------------------------------
// Scoring

double text_score(const IndexedDocument& doc, std::span<const WeightedTerm> terms,
                  const FieldWeights& weights) {
  std::map<std::string_view, double> distinct;
  for (const auto& term : terms) {
    auto [it, inserted] = distinct.emplace(term.text, term.weight);
    if (!inserted) it->second = std::max(it->second, term.weight);
  }
  double score = 0.0;
  for (const auto& [text, q_weight] : distinct) {
    auto it = doc.lexemes.find(text);
    if (it == doc.lexemes.end()) continue;
    double per_term = 0.0;
    for (const auto& lex : it->second) {
      const double tf = static_cast<double>(lex.positions.size());
      per_term += weights.weight(lex.source_field) * tf / (tf + 1.0);
    }
    score += q_weight * per_term;
  }
  return score;
}

bool match_any(const IndexedDocument& doc, std::span<const std::string> terms) {
  return std::any_of(terms.begin(), terms.end(),
                     [&](const std::string& t) { return doc.contains(t); });
}

bool match_all(const IndexedDocument& doc, std::span<const std::string> terms) {
  return std::all_of(terms.begin(), terms.end(),
                     [&](const std::string& t) { return doc.contains(t); });
}

}  // namespace geosearch

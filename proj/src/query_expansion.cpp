#include "geosearch/query_expansion.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "geosearch/error.hpp"
#include "geosearch/files.hpp"

namespace geosearch {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct RelationName {
  Relation value;
  std::string_view name;
};

constexpr RelationName kRelationNames[] = {
    {Relation::Original, "ORIGINAL"}, {Relation::Synonym, "SYNONYM"},
    {Relation::Hypernym, "HYPERNYM"}, {Relation::Hyponym, "HYPONYM"},
    {Relation::IsA, "ISA"},           {Relation::MannerOf, "MANNEROF"},
};

}  // namespace

std::string_view to_string(Relation r) noexcept {
  for (const auto& [value, name] : kRelationNames) {
    if (value == r) return name;
  }
  return "ORIGINAL";
}

std::optional<Relation> parse_relation(std::string_view s) noexcept {
  for (const auto& [value, name] : kRelationNames) {
    if (name == s) return value;
  }
  return std::nullopt;
}

std::string_view to_string(ExpansionSource s) noexcept {
  switch (s) {
    case ExpansionSource::None: return "none";
    case ExpansionSource::WordNet: return "wordnet";
    case ExpansionSource::ConceptNet: return "conceptnet";
  }
  return "none";
}

std::string_view to_string(ExpansionMode m) noexcept {
  return m == ExpansionMode::Full ? "full" : "synonyms";
}

double expansion_weight(ExpansionSource source, Relation relation) {
  if (source == ExpansionSource::WordNet) {
    switch (relation) {
      case Relation::Original: return 1.0;
      case Relation::Synonym: return 1.0;
      case Relation::Hypernym: return 0.8;
      case Relation::Hyponym: return 0.9;
      default: break;
    }
  } else if (source == ExpansionSource::ConceptNet) {
    switch (relation) {
      case Relation::Original: return 1.0;
      case Relation::Synonym: return 1.0;
      case Relation::IsA: return 0.9;
      case Relation::MannerOf: return 0.9;
      default: break;
    }
  } else if (relation == Relation::Original) {
    return 1.0;
  }
  throw Error(ErrorCode::InvalidCombination,
              std::string(to_string(source)) + " has no " + std::string(to_string(relation)));
}

std::vector<Relation> expansion_relations(ExpansionSource source, ExpansionMode mode) {
  switch (source) {
    case ExpansionSource::None: return {};
    case ExpansionSource::WordNet:
      if (mode == ExpansionMode::SynonymsOnly) return {Relation::Synonym};
      return {Relation::Synonym, Relation::Hypernym, Relation::Hyponym};
    case ExpansionSource::ConceptNet:
      if (mode == ExpansionMode::SynonymsOnly) return {Relation::Synonym};
      return {Relation::Synonym, Relation::IsA, Relation::MannerOf};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Thesaurus

void to_json(nlohmann::json& j, const ThesaurusEntry& e) {
  j = nlohmann::json{{"headword", e.headword},
                     {"synonyms", e.synonyms},
                     {"hypernyms", e.hypernyms},
                     {"hyponyms", e.hyponyms}};
}

namespace {

// Removes duplicates (first occurrence wins) and the headword itself.
std::vector<std::string> clean_list(const std::vector<std::string>& in, std::string_view headword) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen{lower(headword)};
  for (const auto& w : in) {
    auto folded = lower(w);
    if (folded.empty() || !seen.insert(folded).second) continue;
    out.push_back(std::move(folded));
  }
  return out;
}

}  // namespace

void from_json(const nlohmann::json& j, ThesaurusEntry& e) {
  e.headword = lower(j.at("headword").get<std::string>());
  if (e.headword.empty()) throw Error(ErrorCode::InvalidArgument, "thesaurus entry without headword");
  e.synonyms = clean_list(j.value("synonyms", std::vector<std::string>{}), e.headword);
  e.hypernyms = clean_list(j.value("hypernyms", std::vector<std::string>{}), e.headword);
  e.hyponyms = clean_list(j.value("hyponyms", std::vector<std::string>{}), e.headword);
}

std::vector<std::string> noun_base_forms(std::string_view word) {
  // WordNet morphy detachment rules for nouns.
  static constexpr std::pair<std::string_view, std::string_view> kRules[] = {
      {"s", ""},     {"ses", "s"},   {"xes", "x"}, {"zes", "z"},
      {"ches", "ch"}, {"shes", "sh"}, {"men", "man"}, {"ies", "y"},
  };
  const std::string w = lower(word);
  std::vector<std::string> out{w};
  for (const auto& [suffix, ending] : kRules) {
    if (w.size() > suffix.size() && w.ends_with(suffix)) {
      auto base = w.substr(0, w.size() - suffix.size()) + std::string(ending);
      if (std::find(out.begin(), out.end(), base) == out.end()) out.push_back(std::move(base));
    }
  }
  return out;
}

Thesaurus::Thesaurus(std::vector<ThesaurusEntry> entries) {
  for (auto& e : entries) {
    auto key = lower(e.headword);
    e.headword = key;
    e.synonyms = clean_list(e.synonyms, key);
    e.hypernyms = clean_list(e.hypernyms, key);
    e.hyponyms = clean_list(e.hyponyms, key);
    entries_.insert_or_assign(std::move(key), std::move(e));
  }
}

Thesaurus Thesaurus::from_json(const nlohmann::json& doc) {
  try {
    return Thesaurus(doc.get<std::vector<ThesaurusEntry>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("thesaurus: ") + e.what());
  }
}

Thesaurus Thesaurus::load_json(const std::filesystem::path& path) {
  auto body = read_file(path);
  if (!body) throw Error(ErrorCode::IoError, "cannot open thesaurus " + path.string());
  try {
    return from_json(nlohmann::json::parse(*body));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "thesaurus " + path.string() + ": " + e.what());
  }
}

nlohmann::json Thesaurus::to_json() const {
  auto out = nlohmann::json::array();
  for (const auto& [key, entry] : entries_) out.push_back(entry);
  return out;
}

const ThesaurusEntry* Thesaurus::find(std::string_view word) const {
  for (const auto& candidate : noun_base_forms(word)) {
    auto it = entries_.find(candidate);
    if (it != entries_.end()) return &it->second;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// WordNet database import

namespace {

struct Synset {
  std::vector<std::string> words;
  std::vector<unsigned long> hypernyms;
  std::vector<unsigned long> hyponyms;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

unsigned long parse_number(std::string_view s, int base, std::size_t line_no, const char* file) {
  if (s.empty()) throw Error(ErrorCode::MalformedDb, std::string(file) + ": empty field", line_no);
  unsigned long v = 0;
  for (char c : s) {
    int digit = -1;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (base == 16 && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else if (base == 16 && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
    if (digit < 0 || digit >= base) {
      throw Error(ErrorCode::MalformedDb,
                  std::string(file) + ": bad number '" + std::string(s) + "'", line_no);
    }
    v = v * static_cast<unsigned long>(base) + static_cast<unsigned long>(digit);
  }
  return v;
}

std::string lemma_text(std::string_view raw) {
  std::string out = lower(raw);
  // Adjective markers like "(a)" never occur in noun files, but strip anyway.
  if (auto paren = out.find('('); paren != std::string::npos && out.back() == ')') {
    out.resize(paren);
  }
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    fn(text.substr(pos, end - pos), line_no);
    pos = end + 1;
  }
}

std::unordered_map<unsigned long, Synset> parse_data_noun(std::string_view data_file) {
  static constexpr const char* kFile = "data.noun";
  std::unordered_map<unsigned long, Synset> synsets;
  for_each_line(data_file, [&](std::string_view line, std::size_t line_no) {
    if (line.empty() || line.front() == ' ') return;  // license header
    const auto fields = split_ws(line.substr(0, line.find('|')));
    if (fields.size() < 4) throw Error(ErrorCode::MalformedDb, "data.noun: short line", line_no);
    const auto offset = parse_number(fields[0], 10, line_no, kFile);
    const auto w_cnt = parse_number(fields[3], 16, line_no, kFile);
    std::size_t i = 4;
    Synset synset;
    for (unsigned long w = 0; w < w_cnt; ++w, i += 2) {
      if (i + 1 >= fields.size()) throw Error(ErrorCode::MalformedDb, "data.noun: missing words", line_no);
      synset.words.push_back(lemma_text(fields[i]));
    }
    if (i >= fields.size()) throw Error(ErrorCode::MalformedDb, "data.noun: missing p_cnt", line_no);
    const auto p_cnt = parse_number(fields[i++], 10, line_no, kFile);
    for (unsigned long p = 0; p < p_cnt; ++p, i += 4) {
      if (i + 3 >= fields.size()) throw Error(ErrorCode::MalformedDb, "data.noun: missing pointer", line_no);
      const auto symbol = fields[i];
      const auto target = parse_number(fields[i + 1], 10, line_no, kFile);
      if (fields[i + 2] != "n") continue;
      if (symbol == "@") synset.hypernyms.push_back(target);
      else if (symbol == "~") synset.hyponyms.push_back(target);
    }
    synsets[offset] = std::move(synset);
  });
  return synsets;
}

}  // namespace

Thesaurus parse_wordnet_db(std::string_view index_file, std::string_view data_file) {
  static constexpr const char* kFile = "index.noun";
  const auto synsets = parse_data_noun(data_file);
  std::vector<ThesaurusEntry> entries;

  for_each_line(index_file, [&](std::string_view line, std::size_t line_no) {
    if (line.empty() || line.front() == ' ') return;
    const auto fields = split_ws(line);
    if (fields.size() < 4) throw Error(ErrorCode::MalformedDb, "index.noun: short line", line_no);
    ThesaurusEntry entry;
    entry.headword = lemma_text(fields[0]);
    const auto synset_cnt = parse_number(fields[2], 10, line_no, kFile);
    const auto p_cnt = parse_number(fields[3], 10, line_no, kFile);
    // lemma pos synset_cnt p_cnt [ptr_symbol]{p_cnt} sense_cnt tagsense_cnt offsets...
    const std::size_t first_offset = 4 + p_cnt + 2;
    if (fields.size() < first_offset + synset_cnt) {
      throw Error(ErrorCode::MalformedDb, "index.noun: missing synset offsets", line_no);
    }
    auto words_of = [&](unsigned long offset) -> const std::vector<std::string>& {
      auto it = synsets.find(offset);
      if (it == synsets.end()) {
        throw Error(ErrorCode::MalformedDb,
                    "index.noun: unknown synset " + std::to_string(offset), line_no);
      }
      return it->second.words;
    };
    for (std::size_t s = 0; s < synset_cnt; ++s) {
      const auto offset = parse_number(fields[first_offset + s], 10, line_no, kFile);
      const auto& synset_words = words_of(offset);
      const auto& synset = synsets.at(offset);
      entry.synonyms.insert(entry.synonyms.end(), synset_words.begin(), synset_words.end());
      for (auto target : synset.hypernyms) {
        const auto& w = words_of(target);
        entry.hypernyms.insert(entry.hypernyms.end(), w.begin(), w.end());
      }
      for (auto target : synset.hyponyms) {
        const auto& w = words_of(target);
        entry.hyponyms.insert(entry.hyponyms.end(), w.begin(), w.end());
      }
    }
    entries.push_back(std::move(entry));
  });
  return Thesaurus(std::move(entries));
}

// ---------------------------------------------------------------------------
// ConceptNet

namespace {

std::string_view conceptnet_relation(Relation r) {
  switch (r) {
    case Relation::Synonym: return "Synonym";
    case Relation::IsA: return "IsA";
    case Relation::MannerOf: return "MannerOf";
    default: break;
  }
  throw Error(ErrorCode::InvalidCombination,
              "ConceptNet has no " + std::string(to_string(r)) + " relation");
}

}  // namespace

std::string conceptnet_slug(std::string_view term) {
  std::string out;
  bool pending = false;
  for (unsigned char c : term) {
    if (std::isspace(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back('_');
    pending = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

ConceptNetClient::ConceptNetClient(Options options) : options_(std::move(options)) {}

std::string ConceptNetClient::query_url(std::string_view term, Relation relation) const {
  std::string base = options_.api_base;
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + "/query?node=/c/en/" + url_encode(conceptnet_slug(term)) + "&rel=/r/" +
         std::string(conceptnet_relation(relation)) +
         "&limit=" + std::to_string(options_.query_limit);
}

std::filesystem::path ConceptNetClient::cache_path(std::string_view term, Relation relation) const {
  return options_.cache_dir / std::string(conceptnet_relation(relation)) /
         (url_encode(conceptnet_slug(term)) + ".json");
}

std::vector<std::string> ConceptNetClient::parse_edges(std::string_view body,
                                                       std::string_view term, std::size_t cap) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("ConceptNet: ") + e.what());
  }
  const auto node = "/c/en/" + conceptnet_slug(term);
  auto is_node = [&](const nlohmann::json& end) {
    const auto id = end.value("@id", std::string{});
    return id == node || id.starts_with(node + "/");
  };
  auto is_english = [](const nlohmann::json& end) {
    if (end.contains("language")) return end.at("language") == "en";
    return end.value("@id", std::string{}).starts_with("/c/en/");
  };

  struct Candidate {
    std::string label;
    double weight;
  };
  std::vector<Candidate> candidates;
  if (auto it = doc.find("edges"); it != doc.end() && it->is_array()) {
    for (const auto& edge : *it) {
      if (!edge.contains("start") || !edge.contains("end")) continue;
      const auto& start = edge.at("start");
      const auto& end = edge.at("end");
      const nlohmann::json* other = nullptr;
      if (is_node(start)) other = &end;
      else if (is_node(end)) other = &start;
      if (!other || !is_english(*other)) continue;
      auto label = lower(other->value("label", std::string{}));
      if (label.empty()) continue;
      candidates.push_back({std::move(label), edge.value("weight", 1.0)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.weight > b.weight; });
  std::vector<std::string> out;
  std::unordered_set<std::string> seen{lower(term), conceptnet_slug(term)};
  for (auto& c : candidates) {
    if (out.size() >= cap) break;
    if (seen.insert(c.label).second) out.push_back(std::move(c.label));
  }
  return out;
}

std::vector<std::string> ConceptNetClient::lookup(std::string_view term, Relation relation,
                                                  std::size_t cap) {
  if (conceptnet_slug(term).empty()) throw Error(ErrorCode::InvalidArgument, "empty term");
  const auto path = cache_path(term, relation);
  const bool caching = !options_.cache_dir.empty();
  if (caching) {
    if (auto cached = read_file(path)) return parse_edges(*cached, term, cap);
  }
  if (options_.offline) {
    throw Error(ErrorCode::NetworkError,
                "ConceptNet offline and no cached " + std::string(conceptnet_relation(relation)) +
                    " edges for '" + std::string(term) + "'");
  }

  std::lock_guard lock(mutex_);
  // Another caller may have filled the cache while we waited.
  if (caching) {
    if (auto cached = read_file(path)) return parse_edges(*cached, term, cap);
  }
  const auto now = std::chrono::steady_clock::now();
  if (network_requests_ > 0 && now - last_request_ < options_.min_spacing) {
    std::this_thread::sleep_for(options_.min_spacing - (now - last_request_));
  }
  const auto url = query_url(term, relation);
  ++network_requests_;
  HttpResponse response;
  try {
    response = http_get(url, options_.http);
  } catch (const Error& e) {
    last_request_ = std::chrono::steady_clock::now();
    if (e.code() == ErrorCode::NotFound) throw Error(ErrorCode::NetworkError, e.what());
    throw;
  }
  last_request_ = std::chrono::steady_clock::now();
  if (response.status != 200) {
    throw Error(ErrorCode::NetworkError, url + " returned HTTP " + std::to_string(response.status));
  }
  auto result = parse_edges(response.body, term, cap);
  if (caching) write_file_atomic(path, response.body);
  return result;
}

// ---------------------------------------------------------------------------
// Expansion

std::vector<WeightedTerm> expand(std::span<const std::string> theme_tokens,
                                 const ExpansionConfig& config, const ExpansionSources& sources) {
  std::map<std::string, WeightedTerm> best;
  auto add = [&](std::string text, Relation relation, double weight) {
    if (text.empty()) return;
    auto [it, inserted] = best.try_emplace(text, WeightedTerm{text, weight, relation});
    if (!inserted && weight > it->second.weight) {
      it->second.weight = weight;
      it->second.relation = relation;
    }
  };

  for (const auto& token : theme_tokens) add(lower(token), Relation::Original, 1.0);

  if (config.source == ExpansionSource::WordNet && !sources.wordnet) {
    throw Error(ErrorCode::InvalidArgument, "WordNet expansion without a thesaurus");
  }
  if (config.source == ExpansionSource::ConceptNet && !sources.conceptnet) {
    throw Error(ErrorCode::InvalidArgument, "ConceptNet expansion without a client");
  }

  const auto relations = expansion_relations(config.source, config.mode);
  const auto cap = config.max_terms_per_relation;
  for (const auto& token : theme_tokens) {
    const ThesaurusEntry* entry =
        config.source == ExpansionSource::WordNet ? sources.wordnet->find(token) : nullptr;
    for (auto relation : relations) {
      const double weight = expansion_weight(config.source, relation);
      std::vector<std::string> terms;
      if (config.source == ExpansionSource::WordNet) {
        if (!entry) continue;
        const auto& list = relation == Relation::Synonym    ? entry->synonyms
                           : relation == Relation::Hypernym ? entry->hypernyms
                                                            : entry->hyponyms;
        terms.assign(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(std::min(cap, list.size())));
      } else {
        terms = sources.conceptnet->lookup(token, relation, cap);
      }
      for (auto& t : terms) add(lower(t), relation, weight);
    }
  }

  std::vector<WeightedTerm> out;
  out.reserve(best.size());
  for (auto& [text, term] : best) out.push_back(std::move(term));
  std::stable_sort(out.begin(), out.end(), [](const WeightedTerm& a, const WeightedTerm& b) {
    return a.weight > b.weight;
  });
  return out;
}

}  // namespace geosearch

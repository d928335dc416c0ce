#include "geosearch/strategy_engine.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <map>

#include "geosearch/error.hpp"

namespace geosearch {

namespace {

using SM = SimilarityMethod;
using ES = ExpansionSource;
using EM = ExpansionMode;

constexpr StrategyInfo kCatalog[] = {
    {StrategyId::Baseline, "Full-text search over theme and place terms", false, SM::None,
     ES::None, EM::SynonymsOnly, false},
    {StrategyId::BaselineAo, "Spatial restriction, area overlap, full-text theme", false,
     SM::AreaOverlap, ES::None, EM::SynonymsOnly, false},
    {StrategyId::BaselineHd, "Spatial restriction, Hausdorff distance, full-text theme", false,
     SM::Hausdorff, ES::None, EM::SynonymsOnly, false},
    {StrategyId::WordNet01Ao, "WordNet synonyms, area overlap", true, SM::AreaOverlap,
     ES::WordNet, EM::SynonymsOnly, false},
    {StrategyId::WordNet01Hd, "WordNet synonyms, Hausdorff distance", true, SM::Hausdorff,
     ES::WordNet, EM::SynonymsOnly, false},
    {StrategyId::WordNet02Ao, "WordNet synonyms, hypernyms and hyponyms, area overlap", true,
     SM::AreaOverlap, ES::WordNet, EM::Full, false},
    {StrategyId::WordNet02Hd, "WordNet synonyms, hypernyms and hyponyms, Hausdorff distance",
     true, SM::Hausdorff, ES::WordNet, EM::Full, false},
    {StrategyId::ConceptNet01Ao, "ConceptNet synonyms, area overlap", true, SM::AreaOverlap,
     ES::ConceptNet, EM::SynonymsOnly, true},
    {StrategyId::ConceptNet01Hd, "ConceptNet synonyms, Hausdorff distance", true, SM::Hausdorff,
     ES::ConceptNet, EM::SynonymsOnly, true},
    {StrategyId::ConceptNet02Ao, "ConceptNet Synonym, IsA and MannerOf, area overlap", true,
     SM::AreaOverlap, ES::ConceptNet, EM::Full, true},
    {StrategyId::ConceptNet02Hd, "ConceptNet Synonym, IsA and MannerOf, Hausdorff distance",
     true, SM::Hausdorff, ES::ConceptNet, EM::Full, true},
};

constexpr std::string_view kNames[] = {
    "baseline",        "baseline-ao",     "baseline-hd",     "wordnet01-ao",
    "wordnet01-hd",    "wordnet02-ao",    "wordnet02-hd",    "conceptnet01-ao",
    "conceptnet01-hd", "conceptnet02-ao", "conceptnet02-hd",
};

// A theme token's alternatives. Each alternative is the stem sequence of one
// (possibly multiword) term; a document satisfies the group when it
// contains every stem of at least one alternative.
using Alternative = std::vector<std::string>;
using RequirementGroup = std::vector<Alternative>;

bool satisfies(const IndexedDocument& doc, const RequirementGroup& group) {
  return std::any_of(group.begin(), group.end(),
                     [&](const Alternative& alt) { return match_all(doc, alt); });
}

void rank(std::vector<RankedResult>& results) {
  std::sort(results.begin(), results.end(), [](const RankedResult& a, const RankedResult& b) {
    if (a.aggregate != b.aggregate) return a.aggregate > b.aggregate;
    return a.dataset_id < b.dataset_id;
  });
  for (std::size_t i = 0; i < results.size(); ++i) results[i].rank = i + 1;
}

}  // namespace

std::string_view to_string(StrategyId id) noexcept {
  return kNames[static_cast<std::size_t>(id)];
}

StrategyId parse_strategy(std::string_view s) {
  std::string folded;
  for (char c : s) {
    folded.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (std::size_t i = 0; i < std::size(kNames); ++i) {
    if (kNames[i] == folded) return static_cast<StrategyId>(i);
  }
  throw Error(ErrorCode::UnknownStrategy, "unknown strategy '" + std::string(s) + "'");
}

std::span<const StrategyInfo> strategy_catalog() noexcept { return kCatalog; }

const StrategyInfo& strategy_info(StrategyId id) noexcept {
  return kCatalog[static_cast<std::size_t>(id)];
}

SearchEngine::SearchEngine(const Index& index, const Gazetteer& gazetteer,
                           ExpansionSources sources, Geocoder* remote, EngineOptions options)
    : index_(index), gazetteer_(gazetteer), sources_(sources), remote_(remote),
      options_(options) {}

SearchOutcome SearchEngine::run(const SearchQuery& query, StrategyId strategy) const {
  const auto start = std::chrono::steady_clock::now();
  const auto& info = strategy_info(strategy);
  SearchOutcome outcome;
  outcome.results = info.similarity == SimilarityMethod::None ? run_baseline(query)
                                                              : run_spatial(query, info);
  const std::chrono::duration<double, std::milli> elapsed =
      std::chrono::steady_clock::now() - start;
  outcome.elapsed_ms_exact = elapsed.count();
  outcome.elapsed_ms = static_cast<std::int64_t>(elapsed.count());
  spdlog::debug("{} '{}' '{}': {} results in {:.1f} ms", to_string(strategy), query.theme,
                query.place, outcome.results.size(), outcome.elapsed_ms_exact);
  return outcome;
}

std::vector<RankedResult> SearchEngine::run_baseline(const SearchQuery& query) const {
  auto terms = preprocess(query.theme);
  const auto place_terms = preprocess(query.place);
  if (terms.empty()) throw Error(ErrorCode::InvalidArgument, "theme has no searchable terms");
  if (place_terms.empty()) throw Error(ErrorCode::InvalidArgument, "place has no searchable terms");
  terms.insert(terms.end(), place_terms.begin(), place_terms.end());
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  std::vector<WeightedTerm> weighted;
  for (const auto& t : terms) weighted.push_back({t, 1.0, Relation::Original});

  std::vector<RankedResult> results;
  for (const auto& doc : index_.documents()) {
    if (!match_all(doc, terms)) continue;
    RankedResult r;
    r.dataset_id = doc.dataset_id;
    r.text_score = text_score(doc, weighted, index_.weights());
    results.push_back(std::move(r));
  }
  if (results.empty()) return results;

  std::vector<double> raw;
  for (const auto& r : results) raw.push_back(r.text_score);
  const auto n = normalize(raw);
  for (std::size_t i = 0; i < results.size(); ++i) {
    results[i].n_text = n[i];
    results[i].aggregate = n[i];
  }
  rank(results);
  return results;
}

std::vector<RankedResult> SearchEngine::run_spatial(const SearchQuery& query,
                                                    const StrategyInfo& info) const {
  const auto tokens = surface_tokens(query.theme);
  if (tokens.empty()) throw Error(ErrorCode::InvalidArgument, "theme has no searchable terms");
  if (query.place.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "place is empty");
  }
  const BBox qbox = geocode(query.place, gazetteer_, remote_);

  const ExpansionConfig config{info.source, info.mode};
  std::vector<RequirementGroup> groups;
  std::map<std::string, double> best_weight;  // stem -> weight
  for (const auto& token : tokens) {
    const std::string one[] = {token};
    RequirementGroup group;
    for (const auto& term : expand(one, config, sources_)) {
      auto stems = preprocess(term.text);
      if (stems.empty()) continue;
      for (const auto& s : stems) {
        auto [it, inserted] = best_weight.try_emplace(s, term.weight);
        if (!inserted) it->second = std::max(it->second, term.weight);
      }
      group.push_back(std::move(stems));
    }
    groups.push_back(std::move(group));
  }
  std::vector<WeightedTerm> weighted;
  for (const auto& [stem, w] : best_weight) weighted.push_back({stem, w, Relation::Original});

  std::vector<RankedResult> results;
  std::vector<double> spatial_sim;
  for (const auto& doc : index_.documents()) {
    if (!doc.bbox || !intersects(qbox, *doc.bbox)) continue;
    if (!std::all_of(groups.begin(), groups.end(),
                     [&](const RequirementGroup& g) { return satisfies(doc, g); })) {
      continue;
    }
    RankedResult r;
    r.dataset_id = doc.dataset_id;
    r.spatial.method = info.similarity;
    r.spatial.raw = info.similarity == SimilarityMethod::AreaOverlap
                        ? area_overlap(qbox, *doc.bbox, options_.overlap)
                        : hausdorff(qbox, *doc.bbox);
    r.text_score = text_score(doc, weighted, index_.weights());
    spatial_sim.push_back(r.spatial.similarity());
    results.push_back(std::move(r));
  }
  if (results.empty()) return results;

  std::vector<double> raw_text;
  for (const auto& r : results) raw_text.push_back(r.text_score);
  const auto nt = normalize(raw_text);
  const auto ns = normalize(spatial_sim);
  for (std::size_t i = 0; i < results.size(); ++i) {
    results[i].n_text = nt[i];
    results[i].n_spatial = ns[i];
    results[i].spatial.normalized = ns[i];
    results[i].aggregate = aggregate_score(nt[i], ns[i]);
  }
  rank(results);
  return results;
}

}  // namespace geosearch

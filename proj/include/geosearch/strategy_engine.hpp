#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geosearch/geo_similarity.hpp"
#include "geosearch/query_expansion.hpp"
#include "geosearch/spatial_enhancer.hpp"
#include "geosearch/text_index.hpp"

namespace geosearch {

enum class StrategyId : std::uint8_t {
  Baseline,
  BaselineAo,
  BaselineHd,
  WordNet01Ao,
  WordNet01Hd,
  WordNet02Ao,
  WordNet02Hd,
  ConceptNet01Ao,
  ConceptNet01Hd,
  ConceptNet02Ao,
  ConceptNet02Hd,
};

/// "baseline", "baseline-ao", "wordnet01-hd", ...
std::string_view to_string(StrategyId id) noexcept;

/// Accepts the hyphenated form and the upper-case enum spelling
/// ("WORDNET01_HD"). Throws Error(UnknownStrategy).
StrategyId parse_strategy(std::string_view s);

struct StrategyInfo {
  StrategyId id;
  std::string_view description;
  bool uses_expansion = false;
  SimilarityMethod similarity = SimilarityMethod::None;
  ExpansionSource source = ExpansionSource::None;
  ExpansionMode mode = ExpansionMode::SynonymsOnly;
  bool slow = false;  // live ConceptNet round trips
};

/// All 11 strategies, BASELINE first and AO before HD in each family.
std::span<const StrategyInfo> strategy_catalog() noexcept;
const StrategyInfo& strategy_info(StrategyId id) noexcept;

struct SearchQuery {
  std::string theme;
  std::string place;
};

struct RankedResult {
  std::string dataset_id;
  double text_score = 0.0;
  SpatialScore spatial;
  double n_text = 0.0;
  std::optional<double> n_spatial;  // absent for BASELINE
  double aggregate = 0.0;
  std::size_t rank = 0;  // 1-based
};

struct SearchOutcome {
  std::vector<RankedResult> results;
  std::int64_t elapsed_ms = 0;
  double elapsed_ms_exact = 0.0;
};

inline double aggregate_score(double n_text, double n_spatial) noexcept {
  return n_text + n_spatial;
}

struct EngineOptions {
  OverlapMode overlap = OverlapMode::Jaccard;
};

/// Read-only over the index and thesaurus; safe to share between threads.
class SearchEngine {
 public:
  SearchEngine(const Index& index, const Gazetteer& gazetteer, ExpansionSources sources = {},
               Geocoder* remote = nullptr, EngineOptions options = {});

  /// Throws Error(PlaceNotFound) for spatial strategies whose place does not
  /// geocode and Error(InvalidArgument) for an empty theme or place. An
  /// empty result list is a normal outcome.
  SearchOutcome run(const SearchQuery& query, StrategyId strategy) const;

  const Index& index() const noexcept { return index_; }

 private:
  std::vector<RankedResult> run_baseline(const SearchQuery& query) const;
  std::vector<RankedResult> run_spatial(const SearchQuery& query, const StrategyInfo& info) const;

  const Index& index_;
  const Gazetteer& gazetteer_;
  ExpansionSources sources_;
  Geocoder* remote_;
  EngineOptions options_;
};

}  // namespace geosearch

#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geosearch/strategy_engine.hpp"

namespace geosearch {

struct RatingRecord {
  std::string user_id;
  std::string query_id;
  StrategyId strategy = StrategyId::Baseline;
  int position = 1;  // 1-based; values past the cutoff are kept but ignored
  std::string dataset_id;
  int stars = 0;  // 0..5

  /// Throws Error(InvalidArgument) on empty ids, position < 1 or stars
  /// outside 0..5.
  void validate() const;

  bool operator==(const RatingRecord&) const = default;
};

/// DCG_p = rel_1 + sum_{i=2..p} rel_i / log2(i), ratings zero-padded to p.
/// Throws Error(InvalidCutoff) when p == 0 or ratings.size() > p.
double dcg(std::span<const int> ratings, std::size_t p);

/// (strategy, query) cell. Strategies are labels so the same table holds
/// engine ids ("wordnet01-ao") or study labels ("s4").
struct CellKey {
  std::string strategy;
  std::string query;

  auto operator<=>(const CellKey&) const = default;
};

struct DcgTable {
  std::map<CellKey, double> values;                                // mean over users
  std::map<CellKey, std::map<std::string, double>> per_user;       // user -> DCG

  std::optional<double> mean(const CellKey& key) const;
};

/// Number of results actually shown for a cell. A user must have rated
/// positions 1..min(p, shown) to count for that cell; positions the engine
/// never showed are padded with zero.
using ShownCounts = std::map<CellKey, std::size_t>;

/// Per-user DCG on position-ordered stars, averaged per cell. Users who left
/// a required position unrated are excluded from the cell. Positions past p
/// are ignored. Throws Error(InvalidArgument) on a duplicate
/// (user, query, strategy, position).
DcgTable mean_dcg(std::span<const RatingRecord> ratings, std::size_t p = 7,
                  const ShownCounts* shown = nullptr);

/// 100 * sample standard deviation / mean. Throws Error(InsufficientData)
/// for fewer than two values and Error(ZeroMean) when the mean is zero.
double coefficient_of_variation(std::span<const double> values);

struct CvTable {
  std::map<CellKey, double> cells;            // percent
  std::map<std::string, double> row_average;  // per strategy
  double mean_of_row_averages = 0.0;
  double mean_of_cells = 0.0;
};

/// Row and global summaries of precomputed per-cell CVs.
CvTable summarize_cv(std::map<CellKey, double> cells);

/// CV of the per-user DCGs of every cell with at least two users and a
/// non-zero mean, then summarized.
CvTable cv_table(const DcgTable& table);

struct BordaResult {
  std::map<CellKey, int> points;
  std::map<std::string, int> totals;
};

/// Per query, strategies ranked by mean DCG descending with competition
/// ranking: a tie block shares the points of its first member, (n-1) minus
/// that member's index. Missing cells rank last with 0 points.
/// Throws Error(InvalidArgument) for fewer than two strategies.
BordaResult borda(const std::map<CellKey, double>& means, std::span<const std::string> strategies,
                  std::span<const std::string> queries);

/// Study label "s1".."s7" of the seven strategies used with raters.
std::optional<std::string> study_label(StrategyId id);
std::span<const StrategyId> study_strategies() noexcept;

/// Re-keys a table's strategy column from engine ids to study labels,
/// dropping strategies that have none.
DcgTable relabel_for_study(const DcgTable& table);

// ---------------------------------------------------------------------------
// Ratings CSV: user_id,query_id,strategy,position,dataset_id,stars

inline constexpr std::string_view kRatingsCsvHeader =
    "user_id,query_id,strategy,position,dataset_id,stars";

void write_ratings_csv(std::ostream& out, std::span<const RatingRecord> ratings);
std::string ratings_csv(std::span<const RatingRecord> ratings);

/// Throws Error(ParseError, line) on malformed rows.
std::vector<RatingRecord> read_ratings_csv(std::istream& in);
std::vector<RatingRecord> parse_ratings_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Benchmark

struct BenchRow {
  StrategyId strategy = StrategyId::Baseline;
  std::string theme;
  std::string place;
  std::int64_t elapsed_ms = 0;
  std::size_t result_count = 0;
  std::optional<std::string> error;
};

struct BenchReport {
  std::string environment;
  std::vector<BenchRow> rows;

  std::size_t error_rows() const noexcept;
  nlohmann::json to_json() const;
  static BenchReport from_json(const nlohmann::json& doc);

  /// Plain-text table: one block per query, one line per strategy.
  std::string render_text() const;
};

/// The four study queries.
std::vector<SearchQuery> default_queries();

/// Host name, hardware threads and compiler.
std::string describe_environment();

/// Runs every (strategy, query) pair once, sequentially, query-major.
/// A failing pair becomes an error row.
BenchReport run_benchmark(std::span<const SearchQuery> queries,
                          std::span<const StrategyId> strategies, const SearchEngine& engine);

}  // namespace geosearch

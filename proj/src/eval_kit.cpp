#include "geosearch/eval_kit.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "geosearch/error.hpp"

namespace geosearch {

void RatingRecord::validate() const {
  if (user_id.empty()) throw Error(ErrorCode::InvalidArgument, "rating without user_id");
  if (query_id.empty()) throw Error(ErrorCode::InvalidArgument, "rating without query_id");
  if (dataset_id.empty()) throw Error(ErrorCode::InvalidArgument, "rating without dataset_id");
  if (position < 1) {
    throw Error(ErrorCode::InvalidArgument, "position must be >= 1, got " + std::to_string(position));
  }
  if (stars < 0 || stars > 5) {
    throw Error(ErrorCode::InvalidArgument, "stars must be 0..5, got " + std::to_string(stars));
  }
}

double dcg(std::span<const int> ratings, std::size_t p) {
  if (p == 0) throw Error(ErrorCode::InvalidCutoff, "cutoff must be at least 1");
  if (ratings.size() > p) {
    throw Error(ErrorCode::InvalidCutoff, std::to_string(ratings.size()) +
                                              " ratings exceed cutoff " + std::to_string(p));
  }
  if (ratings.empty()) return 0.0;
  double sum = ratings[0];
  for (std::size_t i = 1; i < ratings.size(); ++i) {
    sum += ratings[i] / std::log2(static_cast<double>(i + 1));
  }
  return sum;
}

std::optional<double> DcgTable::mean(const CellKey& key) const {
  auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  return it->second;
}

DcgTable mean_dcg(std::span<const RatingRecord> ratings, std::size_t p, const ShownCounts* shown) {
  if (p == 0) throw Error(ErrorCode::InvalidCutoff, "cutoff must be at least 1");
  // cell -> user -> position -> stars
  std::map<CellKey, std::map<std::string, std::map<int, int>>> grouped;
  for (const auto& r : ratings) {
    CellKey key{std::string(to_string(r.strategy)), r.query_id};
    auto& positions = grouped[key][r.user_id];
    if (!positions.emplace(r.position, r.stars).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate rating for user " + r.user_id + ", " + key.query + "/" +
                      key.strategy + " position " + std::to_string(r.position));
    }
  }

  DcgTable table;
  for (const auto& [key, users] : grouped) {
    std::size_t required = p;
    if (shown) {
      if (auto it = shown->find(key); it != shown->end()) required = std::min(p, it->second);
    }
    std::map<std::string, double> per_user;
    for (const auto& [user, positions] : users) {
      std::vector<int> stars(p, 0);
      bool complete = true;
      for (std::size_t pos = 1; pos <= required; ++pos) {
        if (!positions.count(static_cast<int>(pos))) {
          complete = false;
          break;
        }
      }
      if (!complete) continue;
      for (const auto& [pos, s] : positions) {
        if (static_cast<std::size_t>(pos) <= p) stars[static_cast<std::size_t>(pos) - 1] = s;
      }
      per_user[user] = dcg(stars, p);
    }
    if (per_user.empty()) continue;
    double sum = 0.0;
    for (const auto& [user, value] : per_user) sum += value;
    table.values[key] = sum / static_cast<double>(per_user.size());
    table.per_user[key] = std::move(per_user);
  }
  return table;
}

double coefficient_of_variation(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "coefficient of variation needs at least 2 values");
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (mean == 0.0) throw Error(ErrorCode::ZeroMean, "mean is zero");
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return 100.0 * std::sqrt(ss / (n - 1.0)) / mean;
}

CvTable summarize_cv(std::map<CellKey, double> cells) {
  CvTable out;
  out.cells = std::move(cells);
  std::map<std::string, std::pair<double, std::size_t>> rows;
  double cell_sum = 0.0;
  for (const auto& [key, cv] : out.cells) {
    auto& [sum, count] = rows[key.strategy];
    sum += cv;
    ++count;
    cell_sum += cv;
  }
  double row_sum = 0.0;
  for (const auto& [strategy, acc] : rows) {
    const double avg = acc.first / static_cast<double>(acc.second);
    out.row_average[strategy] = avg;
    row_sum += avg;
  }
  if (!rows.empty()) out.mean_of_row_averages = row_sum / static_cast<double>(rows.size());
  if (!out.cells.empty()) out.mean_of_cells = cell_sum / static_cast<double>(out.cells.size());
  return out;
}

CvTable cv_table(const DcgTable& table) {
  std::map<CellKey, double> cells;
  for (const auto& [key, users] : table.per_user) {
    std::vector<double> values;
    for (const auto& [user, v] : users) values.push_back(v);
    try {
      cells[key] = coefficient_of_variation(values);
    } catch (const Error&) {
      // fewer than two users or an all-zero cell: no CV for this cell
    }
  }
  return summarize_cv(std::move(cells));
}

BordaResult borda(const std::map<CellKey, double>& means, std::span<const std::string> strategies,
                  std::span<const std::string> queries) {
  if (strategies.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "Borda ranking needs at least 2 strategies");
  }
  const int n = static_cast<int>(strategies.size());
  BordaResult out;
  for (const auto& s : strategies) out.totals[s] = 0;

  for (const auto& q : queries) {
    std::vector<std::pair<std::string, double>> present;
    for (const auto& s : strategies) {
      if (auto it = means.find({s, q}); it != means.end()) {
        present.emplace_back(s, it->second);
      } else {
        out.points[{s, q}] = 0;
      }
    }
    std::stable_sort(present.begin(), present.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::size_t block_start = 0;
    for (std::size_t i = 0; i < present.size(); ++i) {
      if (i > 0 && present[i].second != present[i - 1].second) block_start = i;
      const int pts = (n - 1) - static_cast<int>(block_start);
      out.points[{present[i].first, q}] = pts;
      out.totals[present[i].first] += pts;
    }
  }
  return out;
}

namespace {

constexpr StrategyId kStudyStrategies[] = {
    StrategyId::Baseline,    StrategyId::BaselineAo,  StrategyId::BaselineHd,
    StrategyId::WordNet01Ao, StrategyId::WordNet01Hd, StrategyId::WordNet02Ao,
    StrategyId::WordNet02Hd,
};

}  // namespace

std::optional<std::string> study_label(StrategyId id) {
  for (std::size_t i = 0; i < std::size(kStudyStrategies); ++i) {
    if (kStudyStrategies[i] == id) return "s" + std::to_string(i + 1);
  }
  return std::nullopt;
}

std::span<const StrategyId> study_strategies() noexcept { return kStudyStrategies; }

DcgTable relabel_for_study(const DcgTable& table) {
  DcgTable out;
  for (const auto& [key, value] : table.values) {
    auto label = study_label(parse_strategy(key.strategy));
    if (!label) continue;
    CellKey relabeled{*label, key.query};
    out.values[relabeled] = value;
    if (auto it = table.per_user.find(key); it != table.per_user.end()) {
      out.per_user[relabeled] = it->second;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

void write_field(std::ostream& out, std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

// Splits one record; quoted fields may span lines, so it pulls more input
// through `next_line` when needed.
template <typename NextLine>
std::vector<std::string> split_record(std::string line, NextLine&& next_line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == line.size()) {
      if (!quoted) break;
      std::string more;
      if (!next_line(more)) throw Error(ErrorCode::ParseError, "unterminated quote", line_no);
      fields.back().push_back('\n');
      line = std::move(more);
      i = 0;
      continue;
    }
    const char c = line[i++];
    if (quoted) {
      if (c == '"') {
        if (i < line.size() && line[i] == '"') {
          fields.back().push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back().push_back(c);
    }
  }
  return fields;
}

int parse_int(const std::string& s, const char* what, std::size_t line_no) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, std::string("bad ") + what + " '" + s + "'", line_no);
  }
  return v;
}

}  // namespace

void write_ratings_csv(std::ostream& out, std::span<const RatingRecord> ratings) {
  out << kRatingsCsvHeader << '\n';
  for (const auto& r : ratings) {
    write_field(out, r.user_id);
    out << ',';
    write_field(out, r.query_id);
    out << ',' << to_string(r.strategy) << ',' << r.position << ',';
    write_field(out, r.dataset_id);
    out << ',' << r.stars << '\n';
  }
}

std::string ratings_csv(std::span<const RatingRecord> ratings) {
  std::ostringstream out;
  write_ratings_csv(out, ratings);
  return out.str();
}

std::vector<RatingRecord> read_ratings_csv(std::istream& in) {
  std::vector<RatingRecord> out;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](std::string& more) {
    if (!std::getline(in, more)) return false;
    ++line_no;
    return true;
  };
  if (!next_line(line)) return out;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRatingsCsvHeader) {
    throw Error(ErrorCode::ParseError, "expected header '" + std::string(kRatingsCsvHeader) + "'", 1);
  }
  while (next_line(line)) {
    const auto start_line = line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_record(line, next_line, start_line);
    if (fields.size() != 6) {
      throw Error(ErrorCode::ParseError, "expected 6 fields, got " + std::to_string(fields.size()),
                  start_line);
    }
    RatingRecord r;
    r.user_id = std::move(fields[0]);
    r.query_id = std::move(fields[1]);
    try {
      r.strategy = parse_strategy(fields[2]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, e.what(), start_line);
    }
    r.position = parse_int(fields[3], "position", start_line);
    r.dataset_id = std::move(fields[4]);
    r.stars = parse_int(fields[5], "stars", start_line);
    try {
      r.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, e.what(), start_line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RatingRecord> parse_ratings_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_ratings_csv(in);
}

// ---------------------------------------------------------------------------
// Benchmark

std::size_t BenchReport::error_rows() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const BenchRow& r) { return r.error.has_value(); }));
}

nlohmann::json BenchReport::to_json() const {
  auto rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row{{"strategy", to_string(r.strategy)},
                       {"theme", r.theme},
                       {"place", r.place},
                       {"elapsed_ms", r.elapsed_ms},
                       {"result_count", r.result_count}};
    if (r.error) row["error"] = *r.error;
    rows_json.push_back(std::move(row));
  }
  return {{"environment", environment}, {"rows", std::move(rows_json)}};
}

BenchReport BenchReport::from_json(const nlohmann::json& doc) {
  BenchReport out;
  try {
    out.environment = doc.value("environment", std::string{});
    for (const auto& row : doc.at("rows")) {
      BenchRow r;
      r.strategy = parse_strategy(row.at("strategy").get<std::string>());
      r.theme = row.at("theme").get<std::string>();
      r.place = row.at("place").get<std::string>();
      r.elapsed_ms = row.at("elapsed_ms").get<std::int64_t>();
      r.result_count = row.at("result_count").get<std::size_t>();
      if (row.contains("error")) r.error = row.at("error").get<std::string>();
      out.rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bench report: ") + e.what());
  }
  return out;
}

std::string BenchReport::render_text() const {
  std::ostringstream out;
  out << "Environment: " << environment << '\n';
  std::vector<std::pair<std::string, std::string>> queries;
  for (const auto& r : rows) {
    std::pair q{r.theme, r.place};
    if (std::find(queries.begin(), queries.end(), q) == queries.end()) queries.push_back(q);
  }
  for (const auto& [theme, place] : queries) {
    out << '\n' << "Query: " << theme << " " << place << '\n';
    out << std::left << std::setw(18) << "Strategy" << std::right << std::setw(12) << "Time (ms)"
        << std::setw(10) << "Results" << '\n';
    for (const auto& r : rows) {
      if (r.theme != theme || r.place != place) continue;
      out << std::left << std::setw(18) << to_string(r.strategy) << std::right;
      if (r.error) {
        out << "  error: " << *r.error << '\n';
      } else {
        out << std::setw(12) << r.elapsed_ms << std::setw(10) << r.result_count << '\n';
      }
    }
  }
  return out.str();
}

std::vector<SearchQuery> default_queries() {
  return {{"Population", "England"},
          {"Learning", "Wales"},
          {"Transport", "Fairfax"},
          {"Communities", "Republic of Ireland"}};
}

std::string describe_environment() {
  char host[256] = {};
  if (::gethostname(host, sizeof host - 1) != 0) host[0] = '\0';
  std::ostringstream out;
  out << (host[0] ? host : "unknown-host") << ", " << std::thread::hardware_concurrency()
      << " hardware threads, ";
#if defined(__clang__)
  out << "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  out << "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
  out << "unknown compiler";
#endif
  return out.str();
}

BenchReport run_benchmark(std::span<const SearchQuery> queries,
                          std::span<const StrategyId> strategies, const SearchEngine& engine) {
  BenchReport report;
  report.environment = describe_environment();
  for (const auto& q : queries) {
    for (auto s : strategies) {
      BenchRow row;
      row.strategy = s;
      row.theme = q.theme;
      row.place = q.place;
      try {
        auto outcome = engine.run(q, s);
        row.elapsed_ms = outcome.elapsed_ms;
        row.result_count = outcome.results.size();
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace geosearch

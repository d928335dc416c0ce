#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <map>
#include <set>
#include <vector>

#include <json.hpp>

#include "geosearch/corpus.hpp"
#include "geosearch/eval_kit.hpp"
#include "geosearch/strategy_engine.hpp"

namespace httplib {
class Server;
}

namespace geosearch {

struct StudyTask {
  std::string task_id;
  std::string topic;
  std::string theme_keyword;
  std::string place_keyword;
  StrategyId strategy = StrategyId::Baseline;
  int results_to_rate = 7;
  std::string query_id;  // defaults to task_id when empty in the script

  void validate() const;
  bool operator==(const StudyTask&) const = default;
};

void to_json(nlohmann::json& j, const StudyTask& t);
void from_json(const nlohmann::json& j, StudyTask& t);

/// 7 study strategies x 4 queries in query-major order, tasks t01..t28.
std::vector<StudyTask> default_task_script();
std::vector<StudyTask> load_task_script(const std::filesystem::path& path);

struct RatingSubmission {
  std::string session_id;
  std::string task_id;
  int position = 0;
  std::string dataset_id;
  int stars = 0;
};

/// Append-only JSON-lines log of session and rating events. Replayed on
/// open; later ratings for the same (session, task, position) replace
/// earlier ones when exported.
class RatingStore {
 public:
  explicit RatingStore(std::filesystem::path log_path);

  std::string create_session();
  bool has_session(const std::string& session_id) const;

  void record(const RatingSubmission& submission, const StudyTask& task);

  /// Materialized ratings, last write wins, ordered by
  /// (user, query, strategy, position).
  std::vector<RatingRecord> snapshot() const;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  using Key = std::tuple<std::string, std::string, int>;  // session, task, position

  void append(const nlohmann::json& event);
  void apply(const nlohmann::json& event);

  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::set<std::string> sessions_;
  std::map<Key, RatingRecord> ratings_;
};

/// HTTP handlers for the study service. Searches are read-only; rating
/// writes go through the store.
class StudyService {
 public:
  /// `tasks` absent means no task script was loaded; /api/tasks then
  /// answers 500.
  StudyService(const SearchEngine& engine, std::span<const DatasetRecord> corpus,
               std::optional<std::vector<StudyTask>> tasks, RatingStore& store);

  void mount(httplib::Server& server) const;

 private:
  const StudyTask* find_task(const std::string& id) const;

  const SearchEngine& engine_;
  std::unordered_map<std::string, const DatasetRecord*> surrogates_;
  std::optional<std::vector<StudyTask>> tasks_;
  RatingStore& store_;
};

}  // namespace geosearch

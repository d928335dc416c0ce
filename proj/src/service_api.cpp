#include "geosearch/service_api.hpp"

#include <httplib.h>
#include <openssl/rand.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "geosearch/error.hpp"
#include "geosearch/files.hpp"

namespace geosearch {

void StudyTask::validate() const {
  if (task_id.empty()) throw Error(ErrorCode::InvalidArgument, "task without task_id");
  if (theme_keyword.empty() || place_keyword.empty()) {
    throw Error(ErrorCode::InvalidArgument, "task " + task_id + " needs both keywords");
  }
  if (results_to_rate < 1) {
    throw Error(ErrorCode::InvalidArgument, "task " + task_id + ": results_to_rate < 1");
  }
}

void to_json(nlohmann::json& j, const StudyTask& t) {
  j = nlohmann::json{{"task_id", t.task_id},
                     {"topic", t.topic},
                     {"theme_keyword", t.theme_keyword},
                     {"place_keyword", t.place_keyword},
                     {"strategy", to_string(t.strategy)},
                     {"results_to_rate", t.results_to_rate},
                     {"query_id", t.query_id}};
}

void from_json(const nlohmann::json& j, StudyTask& t) {
  t.task_id = j.at("task_id").get<std::string>();
  t.topic = j.value("topic", std::string{});
  t.theme_keyword = j.at("theme_keyword").get<std::string>();
  t.place_keyword = j.at("place_keyword").get<std::string>();
  t.strategy = parse_strategy(j.at("strategy").get<std::string>());
  t.results_to_rate = j.value("results_to_rate", 7);
  t.query_id = j.value("query_id", std::string{});
  if (t.query_id.empty()) t.query_id = t.task_id;
}

std::vector<StudyTask> default_task_script() {
  static const char* kTopics[] = {
      "Population statistics for England",
      "Learning and education in Wales",
      "Transport in Fairfax",
      "Communities in the Republic of Ireland",
  };
  const auto queries = default_queries();
  std::vector<StudyTask> tasks;
  int n = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (auto s : study_strategies()) {
      char id[16];
      std::snprintf(id, sizeof id, "t%02d", ++n);
      tasks.push_back({id, kTopics[q], queries[q].theme, queries[q].place, s, 7,
                       "q" + std::to_string(q + 1)});
    }
  }
  return tasks;
}

std::vector<StudyTask> load_task_script(const std::filesystem::path& path) {
  auto body = read_file(path);
  if (!body) throw Error(ErrorCode::IoError, "cannot open task script " + path.string());
  std::vector<StudyTask> tasks;
  try {
    tasks = nlohmann::json::parse(*body).get<std::vector<StudyTask>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "task script " + path.string() + ": " + e.what());
  }
  std::set<std::string> ids;
  for (const auto& t : tasks) {
    t.validate();
    if (!ids.insert(t.task_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate task_id " + t.task_id);
    }
  }
  return tasks;
}

// ---------------------------------------------------------------------------
// RatingStore

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

std::string random_token() {
  unsigned char bytes[16];
  if (RAND_bytes(bytes, sizeof bytes) != 1) {
    throw Error(ErrorCode::InvalidArgument, "random source unavailable");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

}  // namespace

RatingStore::RatingStore(std::filesystem::path log_path) : path_(std::move(log_path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      apply(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      // A torn final line from a crash is expected; anything else is not.
      if (in.peek() == std::char_traits<char>::eof()) {
        spdlog::warn("{}:{}: ignoring incomplete trailing event", path_.string(), line_no);
        break;
      }
      throw Error(ErrorCode::ParseError, path_.string() + ": " + e.what(), line_no);
    }
  }
}

void RatingStore::apply(const nlohmann::json& event) {
  const auto type = event.at("type").get<std::string>();
  if (type == "session") {
    sessions_.insert(event.at("session_id").get<std::string>());
  } else if (type == "rating") {
    RatingRecord r;
    r.user_id = event.at("session_id").get<std::string>();
    r.query_id = event.at("query_id").get<std::string>();
    r.strategy = parse_strategy(event.at("strategy").get<std::string>());
    r.position = event.at("position").get<int>();
    r.dataset_id = event.at("dataset_id").get<std::string>();
    r.stars = event.at("stars").get<int>();
    ratings_[{r.user_id, event.at("task_id").get<std::string>(), r.position}] = std::move(r);
  } else {
    throw Error(ErrorCode::ParseError, "unknown event type '" + type + "'");
  }
}

void RatingStore::append(const nlohmann::json& event) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "cannot append to " + path_.string());
}

std::string RatingStore::create_session() {
  std::lock_guard lock(mutex_);
  std::string id;
  do {
    id = random_token();
  } while (sessions_.count(id));
  nlohmann::json event{{"type", "session"}, {"session_id", id}, {"ts", utc_now()}};
  append(event);
  sessions_.insert(id);
  return id;
}

bool RatingStore::has_session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  return sessions_.count(session_id) > 0;
}

void RatingStore::record(const RatingSubmission& s, const StudyTask& task) {
  RatingRecord r{s.session_id, task.query_id, task.strategy, s.position, s.dataset_id, s.stars};
  r.validate();
  nlohmann::json event{{"type", "rating"},         {"session_id", s.session_id},
                       {"task_id", task.task_id},   {"query_id", task.query_id},
                       {"strategy", to_string(task.strategy)},
                       {"position", s.position},    {"dataset_id", s.dataset_id},
                       {"stars", s.stars},          {"ts", utc_now()}};
  std::lock_guard lock(mutex_);
  if (!sessions_.count(s.session_id)) {
    throw Error(ErrorCode::NotFound, "unknown session " + s.session_id);
  }
  append(event);
  ratings_[{s.session_id, task.task_id, s.position}] = std::move(r);
}

std::vector<RatingRecord> RatingStore::snapshot() const {
  std::vector<RatingRecord> out;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [key, r] : ratings_) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const RatingRecord& a, const RatingRecord& b) {
    return std::tie(a.user_id, a.query_id, a.strategy, a.position) <
           std::tie(b.user_id, b.query_id, b.strategy, b.position);
  });
  return out;
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::PlaceNotFound:
    case ErrorCode::NotFound: return 404;
    case ErrorCode::UnknownStrategy:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyInput: return 400;
    default: return 500;
  }
}

std::optional<int> parse_int(const std::string& s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

nlohmann::json strategy_json(const StrategyInfo& info) {
  nlohmann::json j{{"id", to_string(info.id)},
                   {"description", info.description},
                   {"uses_expansion", info.uses_expansion},
                   {"similarity", to_string(info.similarity)},
                   {"source", to_string(info.source)},
                   {"expansion", info.uses_expansion ? to_string(info.mode) : "none"},
                   {"slow", info.slow}};
  if (auto label = study_label(info.id)) j["study_label"] = *label;
  return j;
}

}  // namespace

StudyService::StudyService(const SearchEngine& engine, std::span<const DatasetRecord> corpus,
                           std::optional<std::vector<StudyTask>> tasks, RatingStore& store)
    : engine_(engine), tasks_(std::move(tasks)), store_(store) {
  for (const auto& r : corpus) surrogates_.emplace(r.id, &r);
}

const StudyTask* StudyService::find_task(const std::string& id) const {
  if (!tasks_) return nullptr;
  for (const auto& t : *tasks_) {
    if (t.task_id == id) return &t;
  }
  return nullptr;
}

void StudyService::mount(httplib::Server& server) const {
  server.Get("/api/strategies", [](const httplib::Request&, httplib::Response& res) {
    auto out = nlohmann::json::array();
    for (const auto& info : strategy_catalog()) out.push_back(strategy_json(info));
    send_json(res, 200, out);
  });

  server.Get("/api/search", [this](const httplib::Request& req, httplib::Response& res) {
    for (const char* p : {"theme", "place", "strategy"}) {
      if (!req.has_param(p) || req.get_param_value(p).empty()) {
        return send_error(res, 400, "MISSING_PARAM", std::string("missing parameter '") + p + "'");
      }
    }
    std::size_t k = 7;
    if (req.has_param("k")) {
      auto v = parse_int(req.get_param_value("k"));
      if (!v || *v < 1) return send_error(res, 400, "INVALID_ARGUMENT", "k must be a positive integer");
      k = static_cast<std::size_t>(*v);
    }
    try {
      const auto strategy = parse_strategy(req.get_param_value("strategy"));
      const SearchQuery query{req.get_param_value("theme"), req.get_param_value("place")};
      const auto outcome = engine_.run(query, strategy);
      auto results = nlohmann::json::array();
      for (std::size_t i = 0; i < outcome.results.size() && i < k; ++i) {
        const auto& r = outcome.results[i];
        nlohmann::json item{{"rank", r.rank},
                            {"dataset_id", r.dataset_id},
                            {"text_score", r.text_score},
                            {"n_text", r.n_text},
                            {"aggregate", r.aggregate}};
        if (r.n_spatial) {
          item["spatial_score"] = r.spatial.raw;
          item["n_spatial"] = *r.n_spatial;
        }
        if (auto it = surrogates_.find(r.dataset_id); it != surrogates_.end()) {
          item["title"] = it->second->title;
          item["description"] = it->second->description;
        }
        results.push_back(std::move(item));
      }
      send_json(res, 200,
                {{"strategy", to_string(strategy)},
                 {"theme", query.theme},
                 {"place", query.place},
                 {"k", k},
                 {"total", outcome.results.size()},
                 {"elapsed_ms", outcome.elapsed_ms},
                 {"results", std::move(results)}});
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    }
  });

  server.Get("/api/tasks", [this](const httplib::Request&, httplib::Response& res) {
    if (!tasks_) return send_error(res, 500, "NO_TASK_SCRIPT", "no task script loaded");
    send_json(res, 200, *tasks_);
  });

  server.Post("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
    try {
      send_json(res, 201, {{"session_id", store_.create_session()}});
    } catch (const Error& e) {
      send_error(res, 500, to_string(e.code()), e.what());
    }
  });

  server.Post("/api/ratings", [this](const httplib::Request& req, httplib::Response& res) {
    RatingSubmission s;
    try {
      const auto body = nlohmann::json::parse(req.body);
      s.session_id = body.at("session_id").get<std::string>();
      s.task_id = body.at("task_id").get<std::string>();
      s.position = body.at("position").get<int>();
      s.dataset_id = body.at("dataset_id").get<std::string>();
      s.stars = body.at("stars").get<int>();
    } catch (const nlohmann::json::exception& e) {
      return send_error(res, 400, "INVALID_ARGUMENT", e.what());
    }
    const auto* task = find_task(s.task_id);
    if (!task) return send_error(res, 404, "NOT_FOUND", "unknown task " + s.task_id);
    if (!store_.has_session(s.session_id)) {
      return send_error(res, 404, "NOT_FOUND", "unknown session " + s.session_id);
    }
    if (s.position < 1 || s.position > task->results_to_rate) {
      return send_error(res, 400, "INVALID_ARGUMENT",
                        "position must be 1.." + std::to_string(task->results_to_rate));
    }
    try {
      store_.record(s, *task);
    } catch (const Error& e) {
      return send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    }
    send_json(res, 201, {{"session_id", s.session_id},
                         {"task_id", s.task_id},
                         {"position", s.position},
                         {"stars", s.stars}});
  });

  server.Get("/api/export/ratings.csv", [this](const httplib::Request&, httplib::Response& res) {
    const auto snapshot = store_.snapshot();
    res.status = 200;
    res.set_content(ratings_csv(snapshot), "text/csv; charset=utf-8");
  });
}

}  // namespace geosearch

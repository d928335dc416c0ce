// geosearch: harvest, enhance, index, search, benchmark, evaluate and serve.

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>

#include "geosearch/error.hpp"
#include "geosearch/eval_kit.hpp"
#include "geosearch/files.hpp"
#include "geosearch/harvester.hpp"
#include "geosearch/query_expansion.hpp"
#include "geosearch/service_api.hpp"
#include "geosearch/spatial_enhancer.hpp"
#include "geosearch/strategy_engine.hpp"
#include "geosearch/text_index.hpp"

namespace fs = std::filesystem;
using namespace geosearch;

namespace {

struct EngineArgs {
  std::string corpus;
  std::string index;
  std::string gazetteer = "data/gazetteer.json";
  std::string thesaurus = "data/thesaurus.json";
  std::string wordnet_dir;
  std::string conceptnet_cache;
  std::string conceptnet_url = "https://api.conceptnet.io";
  bool conceptnet_offline = false;
  std::string geocoder_url;
  std::string geocoder_cache;
  std::string overlap = "jaccard";
};

void add_engine_options(CLI::App* cmd, EngineArgs& a) {
  cmd->add_option("--corpus", a.corpus, "Enhanced corpus (JSON lines)");
  cmd->add_option("--index", a.index, "Binary index written by 'index'; overrides --corpus for search");
  cmd->add_option("--gazetteer", a.gazetteer, "Gazetteer JSON")->capture_default_str();
  cmd->add_option("--thesaurus", a.thesaurus, "WordNet-derived thesaurus JSON")->capture_default_str();
  cmd->add_option("--wordnet-dir", a.wordnet_dir, "Directory with index.noun and data.noun (instead of --thesaurus)");
  cmd->add_option("--conceptnet-cache", a.conceptnet_cache, "ConceptNet response cache directory");
  cmd->add_option("--conceptnet-url", a.conceptnet_url, "ConceptNet API base")->capture_default_str();
  cmd->add_flag("--conceptnet-offline", a.conceptnet_offline, "Answer ConceptNet lookups from the cache only");
  cmd->add_option("--geocoder-url", a.geocoder_url, "Nominatim base URL for places missing from the gazetteer");
  cmd->add_option("--geocoder-cache", a.geocoder_cache, "Geocoder response cache directory");
  cmd->add_option("--overlap", a.overlap, "Area overlap denominator")
      ->check(CLI::IsMember({"jaccard", "query"}))
      ->capture_default_str();
}

// Everything a SearchEngine borrows, kept alive together.
struct EngineBundle {
  std::vector<DatasetRecord> corpus;
  Index index;
  Gazetteer gazetteer;
  Thesaurus thesaurus;
  std::unique_ptr<ConceptNetClient> conceptnet;
  std::unique_ptr<NominatimGeocoder> geocoder;
  std::unique_ptr<SearchEngine> engine;
};

std::unique_ptr<NominatimGeocoder> make_geocoder(const std::string& url, const std::string& cache) {
  if (url.empty()) return nullptr;
  NominatimGeocoder::Options o;
  o.base_url = url;
  o.cache_dir = cache;
  return std::make_unique<NominatimGeocoder>(std::move(o));
}

std::unique_ptr<EngineBundle> load_engine(const EngineArgs& a, bool need_corpus) {
  auto b = std::make_unique<EngineBundle>();
  if (!a.corpus.empty()) b->corpus = read_corpus(a.corpus);
  if (need_corpus && a.corpus.empty()) throw Error(ErrorCode::InvalidArgument, "--corpus is required");
  if (!a.index.empty()) {
    std::ifstream in(a.index, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open index " + a.index);
    b->index = Index::deserialize(in);
  } else if (!a.corpus.empty()) {
    b->index = Index::build(b->corpus);
  } else {
    throw Error(ErrorCode::InvalidArgument, "either --corpus or --index is required");
  }
  b->gazetteer = Gazetteer::load(a.gazetteer);
  if (!a.wordnet_dir.empty()) {
    const auto index_noun = read_file(fs::path(a.wordnet_dir) / "index.noun");
    const auto data_noun = read_file(fs::path(a.wordnet_dir) / "data.noun");
    if (!index_noun || !data_noun) {
      throw Error(ErrorCode::IoError, "missing index.noun or data.noun in " + a.wordnet_dir);
    }
    b->thesaurus = parse_wordnet_db(*index_noun, *data_noun);
  } else if (!a.thesaurus.empty()) {
    b->thesaurus = Thesaurus::load_json(a.thesaurus);
  }
  ConceptNetClient::Options cn;
  cn.api_base = a.conceptnet_url;
  cn.cache_dir = a.conceptnet_cache;
  cn.offline = a.conceptnet_offline;
  b->conceptnet = std::make_unique<ConceptNetClient>(std::move(cn));
  b->geocoder = make_geocoder(a.geocoder_url, a.geocoder_cache);

  EngineOptions options;
  options.overlap = a.overlap == "query" ? OverlapMode::QueryCoverage : OverlapMode::Jaccard;
  b->engine = std::make_unique<SearchEngine>(
      b->index, b->gazetteer, ExpansionSources{&b->thesaurus, b->conceptnet.get()},
      b->geocoder.get(), options);
  return b;
}

std::string host_of(const std::string& url) {
  auto parsed = parse_url(url);
  return parsed ? parsed->host : url;
}

std::vector<RatingRecord> load_ratings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open ratings " + path);
  return read_ratings_csv(in);
}

// Query ids in first-seen order of a table.
std::vector<std::string> queries_of(const DcgTable& t) {
  std::set<std::string> qs;
  for (const auto& [key, v] : t.values) qs.insert(key.query);
  return {qs.begin(), qs.end()};
}

std::vector<std::string> strategies_of(const DcgTable& t, bool study) {
  std::vector<std::string> out;
  if (study) {
    for (auto id : study_strategies()) out.push_back(*study_label(id));
    return out;
  }
  for (const auto& info : strategy_catalog()) {
    const std::string id(to_string(info.id));
    for (const auto& [key, v] : t.values) {
      if (key.strategy == id) {
        out.push_back(id);
        break;
      }
    }
  }
  return out;
}

void print_matrix(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                  const std::function<std::string(const std::string&, const std::string&)>& cell) {
  std::cout << std::left << std::setw(18) << "strategy";
  for (const auto& c : cols) std::cout << std::right << std::setw(10) << c;
  std::cout << '\n';
  for (const auto& r : rows) {
    std::cout << std::left << std::setw(18) << r;
    for (const auto& c : cols) std::cout << std::right << std::setw(10) << cell(r, c);
    std::cout << '\n';
  }
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatially enhanced open data search"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  // harvest
  auto* harvest = app.add_subcommand("harvest", "Harvest CKAN portals into a corpus");
  std::vector<std::string> portals;
  std::string harvest_out, format = "GeoJSON", fixtures, country;
  std::size_t page_size = 100, max_records = 1000;
  harvest->add_option("--portal", portals, "Portal base URL (repeatable)")->required();
  harvest->add_option("--corpus", harvest_out, "Output corpus (JSON lines)")->required();
  harvest->add_option("--format", format, "Resource format filter")->capture_default_str();
  harvest->add_option("--fixtures", fixtures, "Read saved pages from {dir}/ckan/{host}/ instead of the network");
  harvest->add_option("--country", country, "Country hint (ISO alpha-2) for every portal");
  harvest->add_option("--page-size", page_size)->capture_default_str();
  harvest->add_option("--max-records", max_records)->capture_default_str();

  // enhance
  auto* enhance_cmd = app.add_subcommand("enhance", "Assign bounding boxes to corpus records");
  std::string enhance_in, enhance_out, enhance_gaz = "data/gazetteer.json", geo_url, geo_cache;
  std::size_t jobs = 4;
  enhance_cmd->add_option("--corpus", enhance_in, "Input corpus")->required();
  enhance_cmd->add_option("--out", enhance_out, "Output corpus (default: overwrite input)");
  enhance_cmd->add_option("--gazetteer", enhance_gaz)->capture_default_str();
  enhance_cmd->add_option("--fixtures", fixtures, "Resolve resource URLs under {dir}/resources/{host}/");
  enhance_cmd->add_option("--country", country, "Country hint for the fallback tier");
  enhance_cmd->add_option("--jobs", jobs, "Concurrent resource downloads")->capture_default_str();
  enhance_cmd->add_option("--geocoder-url", geo_url);
  enhance_cmd->add_option("--geocoder-cache", geo_cache);

  // index
  auto* index_cmd = app.add_subcommand("index", "Build the binary text index");
  std::string index_in, index_out;
  FieldWeights weights;
  index_cmd->add_option("--corpus", index_in)->required();
  index_cmd->add_option("--index", index_out)->required();
  index_cmd->add_option("--weight-a", weights.weight_a, "Title and tag weight")->capture_default_str();
  index_cmd->add_option("--weight-b", weights.weight_b, "Description weight")->capture_default_str();

  // search
  auto* search = app.add_subcommand("search", "Run one strategy for one query");
  EngineArgs engine_args;
  add_engine_options(search, engine_args);
  std::string strategy, theme, place;
  std::size_t k = 7;
  bool as_json = false;
  search->add_option("--strategy", strategy)->required();
  search->add_option("--theme", theme)->required();
  search->add_option("--place", place)->required();
  search->add_option("--k", k)->capture_default_str();
  search->add_flag("--json", as_json);

  // bench
  auto* bench = app.add_subcommand("bench", "Time strategies over queries");
  add_engine_options(bench, engine_args);
  std::vector<std::string> bench_strategies;
  std::string bench_out;
  bench->add_option("--strategy", bench_strategies, "Strategies (default: all 11)");
  bench->add_option("--out", bench_out, "Write the JSON report here");

  // eval
  std::string ratings;
  std::size_t cutoff = 7;
  bool study = false;
  auto* eval_dcg = app.add_subcommand("eval-dcg", "Mean DCG per strategy and query");
  auto* eval_borda = app.add_subcommand("eval-borda", "Borda totals from mean DCG");
  auto* eval_cv = app.add_subcommand("eval-cv", "Coefficient of variation of per-user DCG");
  for (auto* cmd : {eval_dcg, eval_borda, eval_cv}) {
    cmd->add_option("--ratings", ratings, "Ratings CSV")->required();
    cmd->add_option("--p", cutoff, "DCG cutoff")->capture_default_str();
    cmd->add_flag("--study", study, "Label strategies s1..s7");
  }

  // serve
  auto* serve = app.add_subcommand("serve", "Run the study HTTP service");
  add_engine_options(serve, engine_args);
  std::string tasks_path = "data/tasks.json", host = "0.0.0.0";
  std::string rating_log = "ratings.jsonl";
  int port = 8080;
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--tasks", tasks_path, "Task script JSON")->capture_default_str();
  serve->add_option("--ratings", rating_log, "Rating event log (JSON lines)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*harvest) {
      std::vector<DatasetRecord> all;
      for (const auto& url : portals) {
        PortalSource source{url, country, page_size, max_records};
        std::unique_ptr<PageSource> pages;
        if (!fixtures.empty()) {
          pages = std::make_unique<FixturePageSource>(fs::path(fixtures) / "ckan" / host_of(url));
        } else {
          pages = std::make_unique<CkanHttpPageSource>();
        }
        auto result = harvest_portal(source, format, *pages);
        spdlog::info("{}: {} records ({} filtered, {} duplicates, {} pages)", url,
                     result.stats.emitted, result.stats.filtered_out,
                     result.stats.duplicates_dropped, result.stats.pages);
        for (auto& r : result.records) all.push_back(std::move(r));
      }
      std::cout << write_corpus(all, harvest_out) << " records written to " << harvest_out << '\n';
    } else if (*enhance_cmd) {
      auto records = read_corpus(enhance_in);
      const auto gazetteer = Gazetteer::load(enhance_gaz);
      auto geocoder = make_geocoder(geo_url, geo_cache);
      FetchOptions fetch;
      if (!fixtures.empty()) fetch.fixture_root = fs::path(fixtures);
      EnhanceStats stats;
      records = enhance_corpus(std::move(records), gazetteer, geocoder.get(), fetch, jobs, country, &stats);
      const auto out = enhance_out.empty() ? enhance_in : enhance_out;
      write_corpus(records, out);
      for (const auto& [prov, n] : stats.by_provenance) std::cout << to_string(prov) << '\t' << n << '\n';
      std::cout << records.size() << " records written to " << out << '\n';
    } else if (*index_cmd) {
      const auto records = read_corpus(index_in);
      const auto index = Index::build(records, weights);
      std::ofstream out(index_out, std::ios::binary | std::ios::trunc);
      index.serialize(out);
      if (!out) throw Error(ErrorCode::IoError, "cannot write " + index_out);
      std::cout << index.documents().size() << " documents, " << index.lexeme_count()
                << " lexemes written to " << index_out << '\n';
    } else if (*search) {
      auto b = load_engine(engine_args, false);
      const auto outcome = b->engine->run({theme, place}, parse_strategy(strategy));
      std::map<std::string, const DatasetRecord*> titles;
      for (const auto& r : b->corpus) titles[r.id] = &r;
      if (as_json) {
        auto rows = nlohmann::json::array();
        for (std::size_t i = 0; i < outcome.results.size() && i < k; ++i) {
          const auto& r = outcome.results[i];
          nlohmann::json row{{"rank", r.rank}, {"dataset_id", r.dataset_id},
                             {"text_score", r.text_score}, {"n_text", r.n_text},
                             {"aggregate", r.aggregate}};
          if (r.n_spatial) row["n_spatial"] = *r.n_spatial;
          rows.push_back(std::move(row));
        }
        std::cout << nlohmann::json{{"elapsed_ms", outcome.elapsed_ms},
                                    {"total", outcome.results.size()},
                                    {"results", rows}}.dump(2)
                  << '\n';
      } else {
        std::cout << outcome.results.size() << " results in " << outcome.elapsed_ms << " ms\n";
        for (std::size_t i = 0; i < outcome.results.size() && i < k; ++i) {
          const auto& r = outcome.results[i];
          std::cout << std::setw(3) << r.rank << "  " << fixed(r.aggregate, 3) << "  " << r.dataset_id;
          if (auto it = titles.find(r.dataset_id); it != titles.end()) std::cout << "  " << it->second->title;
          std::cout << '\n';
        }
      }
    } else if (*bench) {
      auto b = load_engine(engine_args, false);
      std::vector<StrategyId> ids;
      if (bench_strategies.empty()) {
        for (const auto& info : strategy_catalog()) ids.push_back(info.id);
      } else {
        for (const auto& s : bench_strategies) ids.push_back(parse_strategy(s));
      }
      const auto queries = default_queries();
      const auto report = run_benchmark(queries, ids, *b->engine);
      std::cout << report.render_text();
      if (!bench_out.empty()) write_file_atomic(bench_out, report.to_json().dump(2) + "\n");
      return report.error_rows() == 0 ? 0 : 1;
    } else if (*eval_dcg || *eval_borda || *eval_cv) {
      const auto records = load_ratings(ratings);
      auto table = mean_dcg(records, cutoff);
      if (study) table = relabel_for_study(table);
      const auto qs = queries_of(table);
      const auto ss = strategies_of(table, study);
      if (*eval_dcg) {
        print_matrix(ss, qs, [&](const std::string& s, const std::string& q) {
          auto v = table.mean({s, q});
          return v ? fixed(*v) : std::string("-");
        });
      } else if (*eval_borda) {
        const auto result = borda(table.values, ss, qs);
        auto cols = qs;
        cols.push_back("total");
        print_matrix(ss, cols, [&](const std::string& s, const std::string& q) {
          if (q == "total") return std::to_string(result.totals.at(s));
          return std::to_string(result.points.at({s, q}));
        });
      } else {
        const auto cv = cv_table(table);
        auto cols = qs;
        cols.push_back("avg");
        print_matrix(ss, cols, [&](const std::string& s, const std::string& q) {
          if (q == "avg") {
            auto it = cv.row_average.find(s);
            return it == cv.row_average.end() ? std::string("-") : fixed(it->second);
          }
          auto it = cv.cells.find({s, q});
          return it == cv.cells.end() ? std::string("-") : fixed(it->second);
        });
        std::cout << "mean of row averages: " << fixed(cv.mean_of_row_averages) << "%\n"
                  << "mean of cells:        " << fixed(cv.mean_of_cells) << "%\n";
      }
    } else if (*serve) {
      auto b = load_engine(engine_args, true);
      std::optional<std::vector<StudyTask>> tasks;
      try {
        tasks = load_task_script(tasks_path);
      } catch (const Error& e) {
        spdlog::error("task script unavailable: {}", e.what());
      }
      RatingStore store(rating_log);
      StudyService service(*b->engine, b->corpus, std::move(tasks), store);
      httplib::Server server;
      service.mount(server);
      spdlog::info("listening on {}:{}", host, port);
      if (!server.listen(host, port)) throw Error(ErrorCode::NetworkError, "cannot listen on port " + std::to_string(port));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

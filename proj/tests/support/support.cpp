#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <random>

#include <spdlog/spdlog.h>

#include "geosearch/harvester.hpp"

namespace fs = std::filesystem;
using namespace geosearch;

namespace testsupport {

fs::path source_dir() { return GEOSEARCH_SOURCE_DIR; }
fs::path fixtures_dir() { return source_dir() / "tests" / "fixtures"; }
fs::path data_dir() { return source_dir() / "data"; }

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("geosearch-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::vector<DatasetRecord> harvest_fixture_portals() {
  std::vector<DatasetRecord> all;
  for (const char* url : kPortals) {
    PortalSource source{url, "", 100, 1000};
    FixturePageSource pages(fixtures_dir() / "ckan" / parse_url(url)->host);
    auto result = harvest_portal(source, "GeoJSON", pages);
    for (auto& r : result.records) all.push_back(std::move(r));
  }
  std::sort(all.begin(), all.end(),
            [](const DatasetRecord& a, const DatasetRecord& b) { return a.id < b.id; });
  return all;
}

const std::vector<DatasetRecord>& fixture_corpus() {
  static const std::vector<DatasetRecord> corpus = [] {
    FetchOptions fetch;
    fetch.fixture_root = fixtures_dir();
    // Several fixture resources are missing on purpose.
    const auto level = spdlog::get_level();
    spdlog::set_level(spdlog::level::err);
    auto out = enhance_corpus(harvest_fixture_portals(), fixture_gazetteer(), nullptr, fetch);
    spdlog::set_level(level);
    return out;
  }();
  return corpus;
}

const Gazetteer& fixture_gazetteer() {
  static const Gazetteer g = Gazetteer::load(data_dir() / "gazetteer.json");
  return g;
}

const Thesaurus& fixture_thesaurus() {
  static const Thesaurus t = Thesaurus::load_json(data_dir() / "thesaurus.json");
  return t;
}

std::unique_ptr<ConceptNetClient> fixture_conceptnet() {
  ConceptNetClient::Options o;
  o.cache_dir = fixtures_dir() / "conceptnet";
  o.offline = true;
  o.min_spacing = std::chrono::milliseconds(0);
  return std::make_unique<ConceptNetClient>(std::move(o));
}

EngineFixture::EngineFixture(const std::vector<DatasetRecord>& corpus)
    : index(Index::build(corpus)), conceptnet(fixture_conceptnet()) {
  engine = std::make_unique<SearchEngine>(
      index, fixture_gazetteer(), ExpansionSources{&fixture_thesaurus(), conceptnet.get()});
}

}  // namespace testsupport

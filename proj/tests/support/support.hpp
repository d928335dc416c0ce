#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "geosearch/corpus.hpp"
#include "geosearch/query_expansion.hpp"
#include "geosearch/spatial_enhancer.hpp"
#include "geosearch/strategy_engine.hpp"
#include "geosearch/text_index.hpp"

namespace testsupport {

std::filesystem::path source_dir();
std::filesystem::path fixtures_dir();
std::filesystem::path data_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline const char* const kPortals[] = {
    "https://data.gov.uk",
    "https://data.gov.ie",
    "https://catalog.data.gov",
    "https://data.example.org",
};

/// Harvest of every fixture portal, not yet enhanced, sorted by id.
std::vector<geosearch::DatasetRecord> harvest_fixture_portals();

/// Harvested and enhanced fixture corpus (computed once).
const std::vector<geosearch::DatasetRecord>& fixture_corpus();

const geosearch::Gazetteer& fixture_gazetteer();
const geosearch::Thesaurus& fixture_thesaurus();

/// Offline ConceptNet client over the fixture cache.
std::unique_ptr<geosearch::ConceptNetClient> fixture_conceptnet();

/// Index, engine and ConceptNet client over a corpus.
struct EngineFixture {
  explicit EngineFixture(const std::vector<geosearch::DatasetRecord>& corpus);

  geosearch::Index index;
  std::unique_ptr<geosearch::ConceptNetClient> conceptnet;
  std::unique_ptr<geosearch::SearchEngine> engine;
};

}  // namespace testsupport

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "geosearch/error.hpp"
#include "geosearch/strategy_engine.hpp"
#include "support.hpp"

using namespace geosearch;
using Catch::Approx;

namespace {

const std::vector<SearchQuery> kQueries{
    {"Population", "England"},
    {"Learning", "Wales"},
    {"Transport", "Fairfax"},
    {"Communities", "Republic of Ireland"},
};

testsupport::EngineFixture& fixture() {
  static testsupport::EngineFixture f(testsupport::fixture_corpus());
  return f;
}

std::set<std::string> ids(const SearchOutcome& o) {
  std::set<std::string> out;
  for (const auto& r : o.results) out.insert(r.dataset_id);
  return out;
}

std::set<std::string> run_ids(const SearchQuery& q, StrategyId s) {
  return ids(fixture().engine->run(q, s));
}

const DatasetRecord& record(const std::string& id) {
  for (const auto& r : testsupport::fixture_corpus()) {
    if (r.id == id) return r;
  }
  throw std::runtime_error("no record " + id);
}

// Brute force over the raw records: term counts straight from the text,
// no index involved.
struct Bag {
  std::map<std::string, int> title, description, tags;
  bool has(const std::string& s) const {
    return title.count(s) || description.count(s) || tags.count(s);
  }
};

Bag bag_of(const DatasetRecord& r) {
  Bag b;
  for (const auto& s : preprocess(r.title)) ++b.title[s];
  for (const auto& s : preprocess(r.description)) ++b.description[s];
  for (const auto& tag : r.tags) {
    for (const auto& s : preprocess(tag)) ++b.tags[s];
  }
  return b;
}

double saturate(const std::map<std::string, int>& m, const std::string& s) {
  auto it = m.find(s);
  if (it == m.end()) return 0.0;
  return it->second / (it->second + 1.0);
}

struct Expected {
  std::string id;
  double aggregate;
};

std::vector<Expected> oracle(const SearchQuery& q, StrategyId id) {
  const auto& info = strategy_info(id);
  const auto& corpus = testsupport::fixture_corpus();
  std::vector<std::string> ids_in;
  std::vector<double> text, spatial;

  if (info.similarity == SimilarityMethod::None) {
    auto terms = preprocess(q.theme + " " + q.place);
    std::set<std::string> uniq(terms.begin(), terms.end());
    for (const auto& r : corpus) {
      const auto b = bag_of(r);
      if (!std::all_of(uniq.begin(), uniq.end(), [&](const auto& t) { return b.has(t); })) continue;
      double score = 0;
      for (const auto& t : uniq) {
        score += saturate(b.title, t) + saturate(b.tags, t) + 0.4 * saturate(b.description, t);
      }
      ids_in.push_back(r.id);
      text.push_back(score);
    }
  } else {
    const auto qbox = testsupport::fixture_gazetteer().find(q.place)->bbox;
    auto cn = testsupport::fixture_conceptnet();
    const ExpansionSources sources{&testsupport::fixture_thesaurus(), cn.get()};
    std::vector<std::vector<std::vector<std::string>>> groups;
    std::map<std::string, double> weight;
    for (const auto& token : surface_tokens(q.theme)) {
      const std::vector<std::string> one{token};
      std::vector<std::vector<std::string>> group;
      for (const auto& t : expand(one, {info.source, info.mode, 10}, sources)) {
        const auto stems = preprocess(t.text);
        if (stems.empty()) continue;
        for (const auto& s : stems) weight[s] = std::max(weight[s], t.weight);
        group.push_back(stems);
      }
      groups.push_back(group);
    }
    for (const auto& r : corpus) {
      if (!r.bbox) continue;
      const auto& d = *r.bbox;
      if (d.max_x < qbox.min_x || qbox.max_x < d.min_x || d.max_y < qbox.min_y || qbox.max_y < d.min_y) {
        continue;
      }
      const auto b = bag_of(r);
      bool ok = true;
      for (const auto& g : groups) {
        ok = ok && std::any_of(g.begin(), g.end(), [&](const auto& alt) {
               return std::all_of(alt.begin(), alt.end(), [&](const auto& s) { return b.has(s); });
             });
      }
      if (!ok) continue;
      double score = 0;
      for (const auto& [s, w] : weight) {
        score += w * (saturate(b.title, s) + saturate(b.tags, s) + 0.4 * saturate(b.description, s));
      }
      ids_in.push_back(r.id);
      text.push_back(score);
      spatial.push_back(info.similarity == SimilarityMethod::AreaOverlap
                            ? area_overlap(qbox, d)
                            : 1.0 / (1.0 + hausdorff(qbox, d)));
    }
  }

  auto minmax = [](std::vector<double> v) {
    if (v.empty()) return v;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double a = *lo, b = *hi;
    for (auto& x : v) x = a == b ? 1.0 : (x - a) / (b - a);
    return v;
  };
  const auto nt = minmax(text), ns = minmax(spatial);
  std::vector<Expected> out;
  for (std::size_t i = 0; i < ids_in.size(); ++i) {
    out.push_back({ids_in[i], nt[i] + (ns.empty() ? 0.0 : ns[i])});
  }
  std::sort(out.begin(), out.end(), [](const Expected& a, const Expected& b) {
    if (std::abs(a.aggregate - b.aggregate) > 1e-12) return a.aggregate > b.aggregate;
    return a.id < b.id;
  });
  return out;
}

DatasetRecord doc(std::string id, std::string title, BBox box) {
  DatasetRecord r;
  r.id = std::move(id);
  r.title = std::move(title);
  r.portal = "https://data.example.org";
  r.bbox = box;
  r.bbox_provenance = BBoxProvenance::GeojsonEnvelope;
  return r;
}

}  // namespace

TEST_CASE("strategy catalog") {
  const auto cat = strategy_catalog();
  REQUIRE(cat.size() == 11);
  const std::vector<std::string> expected{
      "baseline",        "baseline-ao",     "baseline-hd",     "wordnet01-ao",
      "wordnet01-hd",    "wordnet02-ao",    "wordnet02-hd",    "conceptnet01-ao",
      "conceptnet01-hd", "conceptnet02-ao", "conceptnet02-hd"};
  for (std::size_t i = 0; i < cat.size(); ++i) {
    CHECK(to_string(cat[i].id) == expected[i]);
    CHECK(parse_strategy(expected[i]) == cat[i].id);
    CHECK(&strategy_info(cat[i].id) == &cat[i]);
    CHECK_FALSE(cat[i].description.empty());
    CHECK(cat[i].uses_expansion == (cat[i].source != ExpansionSource::None));
    CHECK(cat[i].slow == (cat[i].source == ExpansionSource::ConceptNet));
  }
  const auto& base = strategy_info(StrategyId::Baseline);
  CHECK_FALSE(base.uses_expansion);
  CHECK(base.similarity == SimilarityMethod::None);
  const auto& w2hd = strategy_info(StrategyId::WordNet02Hd);
  CHECK(w2hd.mode == ExpansionMode::Full);
  CHECK(w2hd.similarity == SimilarityMethod::Hausdorff);
  CHECK(w2hd.source == ExpansionSource::WordNet);
  CHECK(strategy_info(StrategyId::ConceptNet01Ao).mode == ExpansionMode::SynonymsOnly);
  CHECK(strategy_info(StrategyId::BaselineAo).similarity == SimilarityMethod::AreaOverlap);

  CHECK(parse_strategy("WORDNET01_HD") == StrategyId::WordNet01Hd);
  CHECK(parse_strategy("conceptnet02_ao") == StrategyId::ConceptNet02Ao);
  try {
    parse_strategy("wordnet03-ao");
    FAIL("expected UNKNOWN_STRATEGY");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownStrategy);
  }
}

TEST_CASE("aggregate score") {
  CHECK(aggregate_score(1.0, 1.0) == 2.0);
  CHECK(aggregate_score(0.0, 0.0) == 0.0);
  CHECK(aggregate_score(0.3, 0.5) == Approx(0.8));
}

TEST_CASE("baseline is a conjunctive keyword search") {
  const auto out = fixture().engine->run({"Population", "England"}, StrategyId::Baseline);
  REQUIRE(out.results.size() == 1);
  const auto& r = out.results[0];
  CHECK(r.dataset_id == "uk-pop-england");
  CHECK_FALSE(r.n_spatial);
  CHECK(r.aggregate == r.n_text);
  CHECK(r.rank == 1);

  // the hand-counted fixture: exactly one record mentions both stems
  std::size_t both = 0;
  for (const auto& rec : testsupport::fixture_corpus()) {
    const auto b = bag_of(rec);
    if (b.has("popul") && b.has("england")) ++both;
  }
  CHECK(both == 1);

  SECTION("no geocoding happens") {
    CHECK(fixture().engine->run({"Population", "Atlantis"}, StrategyId::Baseline).results.empty());
  }
}

TEST_CASE("engine matches the brute-force oracle") {
  for (const auto& q : kQueries) {
    for (const auto& info : strategy_catalog()) {
      INFO(q.theme << " / " << q.place << " / " << to_string(info.id));
      const auto got = fixture().engine->run(q, info.id).results;
      const auto want = oracle(q, info.id);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].dataset_id == want[i].id);
        CHECK(got[i].aggregate == Approx(want[i].aggregate).margin(1e-12));
        CHECK(got[i].rank == i + 1);
      }
    }
  }
}

TEST_CASE("result sets do not depend on the similarity method") {
  const std::pair<StrategyId, StrategyId> pairs[] = {
      {StrategyId::BaselineAo, StrategyId::BaselineHd},
      {StrategyId::WordNet01Ao, StrategyId::WordNet01Hd},
      {StrategyId::WordNet02Ao, StrategyId::WordNet02Hd},
      {StrategyId::ConceptNet01Ao, StrategyId::ConceptNet01Hd},
      {StrategyId::ConceptNet02Ao, StrategyId::ConceptNet02Hd},
  };
  for (const auto& q : kQueries) {
    for (const auto& [ao, hd] : pairs) {
      INFO(q.theme << " " << to_string(ao));
      CHECK(run_ids(q, ao) == run_ids(q, hd));
    }
  }
}

TEST_CASE("expansion only adds results") {
  for (const auto& q : kQueries) {
    const auto base = run_ids(q, StrategyId::BaselineAo);
    for (auto [m1, m2] : {std::pair{StrategyId::WordNet01Ao, StrategyId::WordNet02Ao},
                          std::pair{StrategyId::ConceptNet01Ao, StrategyId::ConceptNet02Ao}}) {
      const auto a = run_ids(q, m1), b = run_ids(q, m2);
      INFO(q.theme << " " << to_string(m1));
      CHECK(std::includes(a.begin(), a.end(), base.begin(), base.end()));
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }
}

TEST_CASE("synonym and hypernym matches") {
  const std::tuple<SearchQuery, std::string, std::string> cases[] = {
      {kQueries[0], "uk-universe-households-london", "uk-groups-register-bristol"},
      {kQueries[1], "uk-scholarship-swansea", "uk-fe-colleges-wales"},
      {kQueries[2], "us-transit-arlington", "us-facility-fairfax"},
      {kQueries[3], "ie-residential-dublin", "ie-electoral-districts"},
  };
  for (const auto& [q, synonym_doc, hypernym_doc] : cases) {
    INFO(q.theme);
    CHECK_FALSE(run_ids(q, StrategyId::BaselineAo).count(synonym_doc));
    CHECK(run_ids(q, StrategyId::WordNet01Ao).count(synonym_doc));
    CHECK_FALSE(run_ids(q, StrategyId::WordNet01Ao).count(hypernym_doc));
    CHECK(run_ids(q, StrategyId::WordNet02Ao).count(hypernym_doc));
  }
}

TEST_CASE("ranking and spatial restriction") {
  for (const auto& q : kQueries) {
    const auto qbox = testsupport::fixture_gazetteer().find(q.place)->bbox;
    for (const auto& info : strategy_catalog()) {
      if (info.similarity == SimilarityMethod::None) continue;
      const auto out = fixture().engine->run(q, info.id);
      for (std::size_t i = 0; i < out.results.size(); ++i) {
        const auto& r = out.results[i];
        REQUIRE(r.n_spatial);
        CHECK(r.aggregate == r.n_text + *r.n_spatial);
        CHECK(r.n_text >= 0.0);
        CHECK(r.n_text <= 1.0);
        CHECK(*r.n_spatial >= 0.0);
        CHECK(*r.n_spatial <= 1.0);
        CHECK(r.spatial.method == info.similarity);
        CHECK(intersects(qbox, *record(r.dataset_id).bbox));
        if (i > 0) {
          const auto& prev = out.results[i - 1];
          CHECK(prev.aggregate >= r.aggregate);
          if (prev.aggregate == r.aggregate) CHECK(prev.dataset_id < r.dataset_id);
        }
      }
      CHECK(out.elapsed_ms >= 0);
      CHECK(out.elapsed_ms == static_cast<std::int64_t>(out.elapsed_ms_exact));
    }
  }
}

TEST_CASE("ties break by dataset id and single results normalize to one") {
  const auto box = BBox::make(0, 1, 0, 1);
  const std::vector<DatasetRecord> corpus{doc("b", "Parks", box), doc("a", "Parks", box),
                                          doc("c", "Parks", BBox::make(5, 6, 5, 6))};
  const auto index = Index::build(corpus);
  const Gazetteer gaz({{"Here", {}, box}});
  const SearchEngine engine(index, gaz);

  const auto out = engine.run({"parks", "Here"}, StrategyId::BaselineAo);
  REQUIRE(out.results.size() == 2);
  CHECK(out.results[0].dataset_id == "a");
  CHECK(out.results[1].dataset_id == "b");
  CHECK(out.results[0].aggregate == 2.0);

  // "here" is a stop word, so the keyword baseline has nothing to match on
  CHECK_THROWS_AS(engine.run({"parks", "Here"}, StrategyId::Baseline), Error);
}

TEST_CASE("overlap denominator option") {
  const std::vector<DatasetRecord> corpus{doc("big", "Parks", BBox::make(0, 4, 0, 4)),
                                          doc("small", "Parks", BBox::make(1, 2, 1, 2))};
  const auto index = Index::build(corpus);
  const Gazetteer gaz({{"Town", {}, BBox::make(1, 2, 1, 2)}});
  const SearchEngine jaccard(index, gaz);
  const SearchEngine coverage(index, gaz, {}, nullptr, EngineOptions{OverlapMode::QueryCoverage});

  auto raw = [](const SearchOutcome& o, const std::string& id) {
    for (const auto& r : o.results) {
      if (r.dataset_id == id) return r.spatial.raw;
    }
    return -1.0;
  };
  const auto j = jaccard.run({"parks", "Town"}, StrategyId::BaselineAo);
  const auto c = coverage.run({"parks", "Town"}, StrategyId::BaselineAo);
  CHECK(raw(j, "big") == Approx(1.0 / 16.0));
  CHECK(raw(c, "big") == 1.0);
  CHECK(raw(j, "small") == 1.0);
}

TEST_CASE("errors") {
  auto& engine = *fixture().engine;
  try {
    engine.run({"Population", "Atlantis"}, StrategyId::WordNet01Hd);
    FAIL("expected PLACE_NOT_FOUND");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PlaceNotFound);
  }
  CHECK_THROWS_AS(engine.run({"", "England"}, StrategyId::BaselineAo), Error);
  CHECK_THROWS_AS(engine.run({"Population", ""}, StrategyId::Baseline), Error);
  CHECK(engine.run({"zymurgy", "England"}, StrategyId::BaselineHd).results.empty());
}

TEST_CASE("concurrent runs agree") {
  auto& engine = *fixture().engine;
  const auto reference = engine.run(kQueries[0], StrategyId::WordNet02Hd).results;
  std::vector<std::vector<RankedResult>> outs(4);
  std::vector<std::thread> threads;
  for (auto& o : outs) {
    threads.emplace_back([&] { o = engine.run(kQueries[0], StrategyId::WordNet02Hd).results; });
  }
  for (auto& t : threads) t.join();
  for (const auto& o : outs) {
    REQUIRE(o.size() == reference.size());
    for (std::size_t i = 0; i < o.size(); ++i) {
      CHECK(o[i].dataset_id == reference[i].dataset_id);
      CHECK(o[i].aggregate == reference[i].aggregate);
    }
  }
}

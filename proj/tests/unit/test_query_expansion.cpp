#include <catch_amalgamated.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>

#include "geosearch/error.hpp"
#include "geosearch/query_expansion.hpp"
#include "local_server.hpp"
#include "support.hpp"

using namespace geosearch;
using testsupport::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Thesaurus fixture_wordnet() {
  const auto dir = testsupport::fixtures_dir() / "wordnet";
  return parse_wordnet_db(slurp(dir / "index.noun"), slurp(dir / "data.noun"));
}

bool has(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

const WeightedTerm* find_term(const std::vector<WeightedTerm>& terms, std::string_view text) {
  for (const auto& t : terms) {
    if (t.text == text) return &t;
  }
  return nullptr;
}

std::set<std::string> texts(const std::vector<WeightedTerm>& terms) {
  std::set<std::string> out;
  for (const auto& t : terms) out.insert(t.text);
  return out;
}

std::vector<WeightedTerm> run(std::vector<std::string> tokens, ExpansionSource source,
                              ExpansionMode mode, ConceptNetClient* cn = nullptr,
                              std::size_t cap = 10) {
  ExpansionConfig config{source, mode, cap};
  return expand(tokens, config, ExpansionSources{&testsupport::fixture_thesaurus(), cn});
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

nlohmann::json edge(std::string start, std::string end, std::string lang, double w) {
  auto node = [](const std::string& label, const std::string& l) {
    std::string slug = label;
    std::replace(slug.begin(), slug.end(), ' ', '_');
    return nlohmann::json{{"@id", "/c/" + l + "/" + slug}, {"label", label}, {"language", l}};
  };
  return {{"start", node(start, "en")}, {"end", node(end, lang)}, {"weight", w}};
}

}  // namespace

TEST_CASE("expansion weights") {
  using S = ExpansionSource;
  using R = Relation;
  CHECK(expansion_weight(S::WordNet, R::Hypernym) == 0.8);
  CHECK(expansion_weight(S::ConceptNet, R::IsA) == 0.9);
  CHECK(expansion_weight(S::WordNet, R::Original) == 1.0);
  CHECK(expansion_weight(S::WordNet, R::Synonym) == 1.0);
  CHECK(expansion_weight(S::WordNet, R::Hyponym) == 0.9);
  CHECK(expansion_weight(S::ConceptNet, R::Original) == 1.0);
  CHECK(expansion_weight(S::ConceptNet, R::Synonym) == 1.0);
  CHECK(expansion_weight(S::ConceptNet, R::MannerOf) == 0.9);
  CHECK(expansion_weight(S::None, R::Original) == 1.0);

  for (auto r : {R::IsA, R::MannerOf}) {
    CHECK(code_of([&] { expansion_weight(S::WordNet, r); }) == ErrorCode::InvalidCombination);
  }
  for (auto r : {R::Hypernym, R::Hyponym}) {
    CHECK(code_of([&] { expansion_weight(S::ConceptNet, r); }) == ErrorCode::InvalidCombination);
  }
  for (auto r : {R::Synonym, R::Hypernym, R::Hyponym, R::IsA, R::MannerOf}) {
    CHECK(code_of([&] { expansion_weight(S::None, r); }) == ErrorCode::InvalidCombination);
  }
}

TEST_CASE("relation names") {
  for (auto r : {Relation::Original, Relation::Synonym, Relation::Hypernym, Relation::Hyponym,
                 Relation::IsA, Relation::MannerOf}) {
    CHECK(parse_relation(to_string(r)) == r);
  }
  CHECK_FALSE(parse_relation("ANTONYM"));
}

TEST_CASE("noun base forms") {
  CHECK(has(noun_base_forms("communities"), "community"));
  CHECK(has(noun_base_forms("boxes"), "box"));
  CHECK(has(noun_base_forms("churches"), "church"));
  CHECK(has(noun_base_forms("roads"), "road"));
  CHECK(has(noun_base_forms("Women"), "woman"));
  CHECK(noun_base_forms("Transport").front() == "transport");
  CHECK(noun_base_forms("").size() <= 1);
}

TEST_CASE("json thesaurus") {
  const auto& t = testsupport::fixture_thesaurus();
  REQUIRE(t.find("community"));
  CHECK(has(t.find("community")->synonyms, "residential area"));
  CHECK(t.find("Communities") == t.find("community"));
  CHECK(t.find("atlantis") == nullptr);

  SECTION("entries are cleaned on load") {
    const auto loaded = Thesaurus::from_json(nlohmann::json::parse(R"([
      {"headword": "Road", "synonyms": ["Route", "route", "road", ""], "hyponyms": ["street"]}])"));
    const auto* e = loaded.find("road");
    REQUIRE(e);
    CHECK(e->synonyms == std::vector<std::string>{"route"});
    CHECK(e->hypernyms.empty());
    CHECK(e->hyponyms == std::vector<std::string>{"street"});
  }
  SECTION("round trip through json") {
    CHECK(Thesaurus::from_json(t.to_json()).entries() == t.entries());
  }
  SECTION("bad input") {
    CHECK_THROWS_AS(Thesaurus::from_json(nlohmann::json::parse(R"([{"synonyms": []}])")), Error);
  }
}

TEST_CASE("wordnet database import") {
  const auto wn = fixture_wordnet();

  const auto* community = wn.find("community");
  REQUIRE(community);
  CHECK(has(community->synonyms, "residential area"));
  CHECK(has(community->synonyms, "residential district"));
  CHECK(has(community->hypernyms, "district"));
  CHECK(has(community->hyponyms, "village"));
  CHECK_FALSE(has(community->synonyms, "community"));

  const auto* village = wn.find("village");
  REQUIRE(village);
  CHECK(has(village->hypernyms, "community"));
  CHECK(has(village->synonyms, "small town"));

  SECTION("senses are pooled") {
    const auto* population = wn.find("population");
    REQUIRE(population);
    CHECK(has(population->synonyms, "universe"));
    CHECK(has(population->hypernyms, "group"));
    CHECK(has(population->hyponyms, "people"));
  }
  SECTION("absent lemma has no entry") { CHECK(wn.find("atlantis") == nullptr); }
  SECTION("round trip through json") {
    CHECK(Thesaurus::from_json(wn.to_json()).entries() == wn.entries());
  }
  SECTION("malformed files report the line") {
    const std::string index = "  1 license text\ncommunity n 1 0 1 0 00000001\n";
    const std::string data = "  1 license text\n00000001 03 n zz community 0 000 | gloss\n";
    try {
      parse_wordnet_db(index, data);
      FAIL("expected MALFORMED_DB");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedDb);
      CHECK(e.line() == 2u);
    }
    try {
      parse_wordnet_db("community n one\n", "");
      FAIL("expected MALFORMED_DB");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedDb);
      CHECK(e.line() == 1u);
    }
  }
}

TEST_CASE("conceptnet from the fixture cache") {
  auto cn = testsupport::fixture_conceptnet();

  const auto sun = cn->lookup("sunlight", Relation::Synonym, 10);
  CHECK(has(sun, "sunshine"));
  CHECK(sun == std::vector<std::string>{"sunshine", "daylight"});  // self and duplicates dropped

  const auto car = cn->lookup("car", Relation::IsA, 10);
  CHECK(has(car, "vehicle"));
  CHECK_FALSE(has(car, "voiture"));
  CHECK(car == std::vector<std::string>{"vehicle", "motor vehicle"});
  CHECK(cn->lookup("car", Relation::IsA, 1) == std::vector<std::string>{"vehicle"});

  CHECK(cn->lookup("population", Relation::MannerOf, 10).empty());
  CHECK(cn->network_requests() == 0);

  CHECK(code_of([&] { cn->lookup("zebra", Relation::Synonym, 10); }) == ErrorCode::NetworkError);
  CHECK(code_of([&] { cn->lookup("car", Relation::Hypernym, 10); }) ==
        ErrorCode::InvalidCombination);
  CHECK(code_of([&] { cn->lookup(" ", Relation::Synonym, 10); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("conceptnet urls and slugs") {
  CHECK(conceptnet_slug("  Motor  Vehicle ") == "motor_vehicle");
  ConceptNetClient::Options o;
  o.api_base = "https://api.conceptnet.io/";
  o.query_limit = 50;
  ConceptNetClient cn(o);
  CHECK(cn.query_url("Car", Relation::IsA) ==
        "https://api.conceptnet.io/query?node=/c/en/car&rel=/r/IsA&limit=50");
  CHECK(cn.query_url("car", Relation::MannerOf).find("rel=/r/MannerOf") != std::string::npos);
  CHECK(code_of([] { ConceptNetClient::parse_edges("{", "car", 5); }) ==
        ErrorCode::MalformedResponse);
}

TEST_CASE("conceptnet over http") {
  testsupport::LocalServer srv;
  std::atomic<int> hits{0};
  std::vector<std::string> nodes;
  std::mutex mu;
  srv.server.Get("/query", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    {
      std::lock_guard lock(mu);
      nodes.push_back(req.get_param_value("node") + " " + req.get_param_value("rel"));
    }
    if (req.get_param_value("node") == "/c/en/broken") {
      res.status = 500;
      return;
    }
    nlohmann::json body = {{"edges", {edge("bicycle", "bike", "en", 2.0),
                                      edge("bicycle", "velo", "fr", 3.0),
                                      edge("bicycle", "push bike", "en", 1.0)}}};
    res.set_content(body.dump(), "application/json");
  });
  srv.start();

  TempDir cache;
  ConceptNetClient::Options o;
  o.api_base = srv.url();
  o.cache_dir = cache.path();
  o.min_spacing = std::chrono::milliseconds(120);
  o.http.retry.attempts = 2;
  o.http.retry.initial_backoff = std::chrono::milliseconds(1);
  ConceptNetClient cn(o);

  const auto first = cn.lookup("bicycle", Relation::Synonym, 10);
  CHECK(first == std::vector<std::string>{"bike", "push bike"});
  CHECK(std::filesystem::exists(cache / "Synonym" / "bicycle.json"));
  CHECK(cn.lookup("Bicycle", Relation::Synonym, 10) == first);
  CHECK(hits == 1);

  const auto t0 = std::chrono::steady_clock::now();
  cn.lookup("bicycle", Relation::IsA, 10);
  CHECK(std::chrono::steady_clock::now() - t0 >= std::chrono::milliseconds(100));
  CHECK(hits == 2);
  CHECK(cn.network_requests() == 2);
  CHECK(nodes[1] == "/c/en/bicycle /r/IsA");

  CHECK(code_of([&] { cn.lookup("broken", Relation::Synonym, 10); }) == ErrorCode::NetworkError);
  CHECK_FALSE(std::filesystem::exists(cache / "Synonym" / "broken.json"));

  SECTION("a warm cache works offline") {
    srv.stop();
    auto offline = o;
    offline.offline = true;
    ConceptNetClient again(offline);
    CHECK(again.lookup("bicycle", Relation::Synonym, 10) == first);
  }
}

TEST_CASE("expand") {
  SECTION("no source gives the originals") {
    const auto out = run({"Population", "england"}, ExpansionSource::None, ExpansionMode::Full);
    CHECK(out == std::vector<WeightedTerm>{{"england", 1.0, Relation::Original},
                                           {"population", 1.0, Relation::Original}});
  }
  SECTION("wordnet synonyms") {
    const auto out = run({"community"}, ExpansionSource::WordNet, ExpansionMode::SynonymsOnly);
    const auto* t = find_term(out, "residential area");
    REQUIRE(t);
    CHECK(*t == WeightedTerm{"residential area", 1.0, Relation::Synonym});
    CHECK(find_term(out, "district") == nullptr);
    CHECK(out.front() == WeightedTerm{"community", 1.0, Relation::Original});
  }
  SECTION("wordnet full") {
    const auto out = run({"learning"}, ExpansionSource::WordNet, ExpansionMode::Full);
    const auto* t = find_term(out, "education");
    REQUIRE(t);
    CHECK(*t == WeightedTerm{"education", 0.8, Relation::Hypernym});
    CHECK(find_term(out, "memorization")->weight == 0.9);
    CHECK(find_term(out, "scholarship")->weight == 1.0);
  }
  SECTION("plural surface forms reach their headword") {
    const auto out = run({"communities"}, ExpansionSource::WordNet, ExpansionMode::SynonymsOnly);
    CHECK(find_term(out, "residential district"));
  }
  SECTION("conceptnet full") {
    auto cn = testsupport::fixture_conceptnet();
    const auto out = run({"transport"}, ExpansionSource::ConceptNet, ExpansionMode::Full, cn.get());
    CHECK(*find_term(out, "transportation") == WeightedTerm{"transportation", 1.0, Relation::Synonym});
    CHECK(*find_term(out, "commerce") == WeightedTerm{"commerce", 0.9, Relation::IsA});
    CHECK(*find_term(out, "move") == WeightedTerm{"move", 0.9, Relation::MannerOf});
    CHECK(find_term(out, "transporte") == nullptr);
  }
  SECTION("conceptnet miss propagates") {
    auto cn = testsupport::fixture_conceptnet();
    CHECK(code_of([&] {
            run({"zebra"}, ExpansionSource::ConceptNet, ExpansionMode::SynonymsOnly, cn.get());
          }) == ErrorCode::NetworkError);
  }
  SECTION("missing source") {
    ExpansionConfig config{ExpansionSource::WordNet, ExpansionMode::Full, 10};
    const std::vector<std::string> tokens{"learning"};
    CHECK(code_of([&] { expand(tokens, config, {}); }) == ErrorCode::InvalidArgument);
  }
  SECTION("duplicates keep their best weight") {
    const Thesaurus t({{"a", {}, {"b", "c"}, {"b"}}});
    ExpansionConfig config{ExpansionSource::WordNet, ExpansionMode::Full, 10};
    const std::vector<std::string> one{"a"}, two{"a", "c"};
    CHECK(*find_term(expand(one, config, {&t, nullptr}), "b") ==
          WeightedTerm{"b", 0.9, Relation::Hyponym});
    CHECK(*find_term(expand(two, config, {&t, nullptr}), "c") ==
          WeightedTerm{"c", 1.0, Relation::Original});
  }
  SECTION("cap per relation") {
    const auto out = run({"learning"}, ExpansionSource::WordNet, ExpansionMode::SynonymsOnly, nullptr, 1);
    CHECK(out.size() == 2);
    CHECK(find_term(out, "acquisition"));
  }
}

TEST_CASE("expansion properties") {
  auto cn = testsupport::fixture_conceptnet();
  const std::vector<std::vector<std::string>> queries{
      {"population"}, {"learning"}, {"transport"}, {"communities"}, {"school", "road"}};
  const std::set<double> allowed{1.0, 0.9, 0.8};
  for (const auto& q : queries) {
    const auto none = texts(run(q, ExpansionSource::None, ExpansionMode::Full));
    for (auto source : {ExpansionSource::WordNet, ExpansionSource::ConceptNet}) {
      if (source == ExpansionSource::ConceptNet && q.size() > 1) continue;
      const auto syn = run(q, source, ExpansionMode::SynonymsOnly, cn.get());
      const auto full = run(q, source, ExpansionMode::Full, cn.get());
      const auto s = texts(syn), f = texts(full);
      CHECK(std::includes(s.begin(), s.end(), none.begin(), none.end()));
      CHECK(std::includes(f.begin(), f.end(), s.begin(), s.end()));
      for (const auto& t : full) {
        CHECK(allowed.count(t.weight) == 1);
        CHECK_FALSE(t.text.empty());
      }
      CHECK(std::is_sorted(full.begin(), full.end(), [](const auto& a, const auto& b) {
        return a.weight > b.weight || (a.weight == b.weight && a.text < b.text);
      }));
      CHECK(run(q, source, ExpansionMode::Full, cn.get()) == full);
    }
  }
}

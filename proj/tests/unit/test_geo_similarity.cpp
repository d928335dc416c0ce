#include <catch_amalgamated.hpp>

#include <random>

#include "geosearch/error.hpp"
#include "geosearch/geo_similarity.hpp"
#include "oracles.hpp"

using namespace geosearch;
using Catch::Approx;

namespace {

BBox box(double x0, double x1, double y0, double y1) { return BBox::make(x0, x1, y0, y1); }

BBox random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> centre(-20.0, 20.0);
  std::uniform_real_distribution<double> size(0.05, 15.0);
  const double cx = centre(rng), cy = centre(rng), w = size(rng), h = size(rng);
  return box(cx - w / 2, cx + w / 2, cy - h / 2, cy + h / 2);
}

}  // namespace

TEST_CASE("bbox construction validates ordering") {
  CHECK_NOTHROW(box(0, 1, 0, 1));
  CHECK_NOTHROW(box(5, 5, 10, 10));
  CHECK_THROWS_AS(box(1, 0, 0, 1), Error);
  CHECK_THROWS_AS(box(0, 1, 2, 1), Error);
  CHECK(box(0, 1, 0, 1).merged(box(2, 3, -1, 0)) == box(0, 3, -1, 1));
}

TEST_CASE("intersects uses closed boxes") {
  CHECK(intersects(box(0, 1, 0, 1), box(0, 1, 0, 1)));
  CHECK_FALSE(intersects(box(0, 1, 0, 1), box(2, 3, 0, 1)));
  CHECK(intersects(box(0, 1, 0, 1), box(1, 2, 0, 1)));
  CHECK(intersects(box(0, 1, 0, 1), box(1, 2, 1, 2)));  // shared corner
  CHECK(intersects(box(0, 4, 0, 4), box(1, 2, 1, 2)));  // containment
  CHECK(intersects(box(0.5, 0.5, 0.5, 0.5), box(0, 1, 0, 1)));
}

TEST_CASE("area overlap") {
  CHECK(area_overlap(box(0, 1, 0, 1), box(0, 1, 0, 1)) == 1.0);
  CHECK(area_overlap(box(0, 1, 0, 1), box(2, 3, 0, 1)) == 0.0);
  CHECK(area_overlap(box(0, 2, 0, 2), box(1, 3, 1, 3)) == Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(area_overlap(box(0, 1, 0, 1), box(1, 2, 0, 1)) == 0.0);  // edge contact has no area

  SECTION("query coverage denominator") {
    CHECK(area_overlap(box(0, 2, 0, 2), box(1, 3, 1, 3), OverlapMode::QueryCoverage) ==
          Approx(0.25));
    CHECK(area_overlap(box(1, 2, 1, 2), box(0, 4, 0, 4), OverlapMode::QueryCoverage) == 1.0);
  }
  SECTION("degenerate boxes") {
    CHECK(area_overlap(box(1, 1, 1, 1), box(1, 1, 1, 1)) == 1.0);
    CHECK(area_overlap(box(1, 1, 1, 1), box(2, 2, 2, 2)) == 0.0);
    CHECK(area_overlap(box(1, 1, 1, 1), box(0, 2, 0, 2), OverlapMode::QueryCoverage) == 1.0);
    CHECK(area_overlap(box(5, 5, 1, 1), box(0, 2, 0, 2), OverlapMode::QueryCoverage) == 0.0);
  }
}

TEST_CASE("hausdorff distance between rectangles") {
  CHECK(hausdorff(box(0, 1, 0, 1), box(0, 1, 0, 1)) == 0.0);
  CHECK(hausdorff(box(0, 1, 0, 1), box(2, 3, 0, 1)) == Approx(2.0).epsilon(1e-12));
  CHECK(hausdorff(box(0, 4, 0, 4), box(1, 2, 1, 2)) == Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));

  // worked values agree with the sampling oracle
  CHECK(oracle::hausdorff(box(0, 1, 0, 1), box(2, 3, 0, 1)) == Approx(2.0).margin(1e-3));
  CHECK(oracle::hausdorff(box(0, 4, 0, 4), box(1, 2, 1, 2)) ==
        Approx(2.828427).margin(1e-3));

  CHECK(point_box_distance(0.5, 0.5, box(0, 1, 0, 1)) == 0.0);
  CHECK(point_box_distance(4, 5, box(0, 1, 0, 1)) == Approx(5.0));
}

TEST_CASE("hd to similarity") {
  CHECK(hd_to_similarity(0) == 1.0);
  CHECK(hd_to_similarity(1) == 0.5);
  CHECK(hd_to_similarity(3) == 0.25);
  CHECK_THROWS_AS(hd_to_similarity(-1), Error);
  SpatialScore s{3.0, SimilarityMethod::Hausdorff, std::nullopt};
  CHECK(s.similarity() == 0.25);
  SpatialScore a{0.4, SimilarityMethod::AreaOverlap, std::nullopt};
  CHECK(a.similarity() == 0.4);
}

TEST_CASE("normalize") {
  const std::vector<double> a{0.2, 0.5, 0.8};
  const auto na = normalize(a);
  CHECK(na[0] == Approx(0.0));
  CHECK(na[1] == Approx(0.5));
  CHECK(na[2] == Approx(1.0));
  CHECK(normalize(std::vector<double>{0.7, 0.7, 0.7}) == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(normalize(std::vector<double>{0.0, 1.0}) == std::vector<double>{0.0, 1.0});
  CHECK(normalize(std::vector<double>{3.0}) == std::vector<double>{1.0});
  CHECK_THROWS_AS(normalize(std::vector<double>{}), Error);
}

TEST_CASE("similarity properties on random boxes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> score(0.0, 50.0);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_box(rng), b = random_box(rng);
    INFO(i);
    CHECK(hausdorff(a, b) == hausdorff(b, a));
    CHECK(area_overlap(a, b) == Approx(area_overlap(b, a)).margin(1e-15));
    const double ao = area_overlap(a, b);
    CHECK(ao >= 0.0);
    CHECK(ao <= 1.0);
    CHECK((ao > 0.0) <= intersects(a, b));
    CHECK(hausdorff(a, b) == Approx(oracle::hausdorff(a, b)).margin(1e-3));

    std::vector<double> xs;
    for (int k = 0; k < 8; ++k) xs.push_back(score(rng));
    const auto n = normalize(xs);
    for (std::size_t p = 0; p < xs.size(); ++p) {
      CHECK(n[p] >= 0.0);
      CHECK(n[p] <= 1.0);
      for (std::size_t q = 0; q < xs.size(); ++q) {
        if (xs[p] < xs[q]) CHECK(n[p] <= n[q]);
      }
    }
  }
}

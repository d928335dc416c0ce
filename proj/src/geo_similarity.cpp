#include "geosearch/geo_similarity.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "geosearch/error.hpp"

namespace geosearch {

std::string_view to_string(SimilarityMethod method) noexcept {
  switch (method) {
    case SimilarityMethod::None: return "none";
    case SimilarityMethod::AreaOverlap: return "ao";
    case SimilarityMethod::Hausdorff: return "hd";
  }
  return "none";
}

double SpatialScore::similarity() const noexcept {
  return method == SimilarityMethod::Hausdorff ? 1.0 / (1.0 + raw) : raw;
}

bool intersects(const BBox& a, const BBox& b) noexcept {
  return a.min_x <= b.max_x && b.min_x <= a.max_x && a.min_y <= b.max_y &&
         b.min_y <= a.max_y;
}

namespace {

double intersection_area(const BBox& a, const BBox& b) noexcept {
  const double w = std::min(a.max_x, b.max_x) - std::max(a.min_x, b.min_x);
  const double h = std::min(a.max_y, b.max_y) - std::max(a.min_y, b.min_y);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

bool contains(const BBox& outer, const BBox& inner) noexcept {
  return outer.min_x <= inner.min_x && inner.max_x <= outer.max_x &&
         outer.min_y <= inner.min_y && inner.max_y <= outer.max_y;
}

}  // namespace

double area_overlap(const BBox& query, const BBox& doc, OverlapMode mode) noexcept {
  const double inter = intersection_area(query, doc);
  if (mode == OverlapMode::QueryCoverage) {
    const double qa = query.area();
    if (qa <= 0.0) return contains(doc, query) ? 1.0 : 0.0;
    return std::clamp(inter / qa, 0.0, 1.0);
  }
  const double uni = query.area() + doc.area() - inter;
  if (uni <= 0.0) return query == doc ? 1.0 : 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double point_box_distance(double x, double y, const BBox& box) noexcept {
  const double dx = std::max({box.min_x - x, 0.0, x - box.max_x});
  const double dy = std::max({box.min_y - y, 0.0, y - box.max_y});
  return std::hypot(dx, dy);
}

namespace {

double directed_hausdorff(const BBox& from, const BBox& to) noexcept {
  const std::array<std::array<double, 2>, 4> corners{{{from.min_x, from.min_y},
                                                      {from.min_x, from.max_y},
                                                      {from.max_x, from.min_y},
                                                      {from.max_x, from.max_y}}};
  double worst = 0.0;
  for (const auto& [x, y] : corners) worst = std::max(worst, point_box_distance(x, y, to));
  return worst;
}

}  // namespace

double hausdorff(const BBox& a, const BBox& b) noexcept {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double hd_to_similarity(double hd) {
  if (!(hd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative Hausdorff distance");
  return 1.0 / (1.0 + hd);
}

std::vector<double> normalize(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "normalize() needs at least one score");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double min = *lo;
  const double range = *hi - min;
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) {
    out.push_back(range > 0.0 ? std::clamp((s - min) / range, 0.0, 1.0) : 1.0);
  }
  return out;
}

}  // namespace geosearch

#pragma once

// Brute-force reference implementations. They deliberately avoid the
// library's closed forms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "geosearch/bbox.hpp"

namespace oracle {

inline double point_segment_distance(double px, double py, double ax, double ay, double bx,
                                     double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::max(0.0, std::min(1.0, t));
  const double cx = ax + t * dx, cy = ay + t * dy;
  return std::hypot(px - cx, py - cy);
}

// Distance from a point to a filled rectangle: zero inside, else the
// nearest of the four edges.
inline double point_rect_distance(double x, double y, const geosearch::BBox& b) {
  if (x >= b.min_x && x <= b.max_x && y >= b.min_y && y <= b.max_y) return 0.0;
  const double corners[4][2] = {
      {b.min_x, b.min_y}, {b.max_x, b.min_y}, {b.max_x, b.max_y}, {b.min_x, b.max_y}};
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const auto* p = corners[i];
    const auto* q = corners[(i + 1) % 4];
    best = std::min(best, point_segment_distance(x, y, p[0], p[1], q[0], q[1]));
  }
  return best;
}

// Directed Hausdorff distance from `a` to `b`, maximized over an n x n
// grid of `a` (interior and boundary) plus `edge_samples` points per edge.
inline double directed_hausdorff(const geosearch::BBox& a, const geosearch::BBox& b,
                                 std::size_t n = 60, std::size_t edge_samples = 400) {
  double worst = 0.0;
  auto visit = [&](double x, double y) { worst = std::max(worst, point_rect_distance(x, y, b)); };
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      visit(a.min_x + (a.max_x - a.min_x) * static_cast<double>(i) / static_cast<double>(n),
            a.min_y + (a.max_y - a.min_y) * static_cast<double>(j) / static_cast<double>(n));
    }
  }
  for (std::size_t i = 0; i <= edge_samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(edge_samples);
    const double x = a.min_x + (a.max_x - a.min_x) * t;
    const double y = a.min_y + (a.max_y - a.min_y) * t;
    visit(x, a.min_y);
    visit(x, a.max_y);
    visit(a.min_x, y);
    visit(a.max_x, y);
  }
  return worst;
}

inline double hausdorff(const geosearch::BBox& a, const geosearch::BBox& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

// Jaccard overlap estimated by counting cell centres of a grid laid over
// the union's bounding box.
inline double area_overlap_grid(const geosearch::BBox& q, const geosearch::BBox& d,
                                std::size_t n = 500) {
  const double x0 = std::min(q.min_x, d.min_x), x1 = std::max(q.max_x, d.max_x);
  const double y0 = std::min(q.min_y, d.min_y), y1 = std::max(q.max_y, d.max_y);
  auto inside = [](const geosearch::BBox& b, double x, double y) {
    return x >= b.min_x && x <= b.max_x && y >= b.min_y && y <= b.max_y;
  };
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x0 + (x1 - x0) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double y = y0 + (y1 - y0) * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      const bool in_q = inside(q, x, y), in_d = inside(d, x, y);
      both += in_q && in_d;
      either += in_q || in_d;
    }
  }
  return either ? static_cast<double>(both) / static_cast<double>(either) : 0.0;
}

// DCG by explicit padding and a discount of ln(i)/ln(2).
inline double dcg(const std::vector<int>& ratings, std::size_t p) {
  std::vector<int> padded(ratings);
  padded.resize(p, 0);
  double total = 0.0;
  for (std::size_t i = 1; i <= p; ++i) {
    const double rel = padded[i - 1];
    total += i == 1 ? rel : rel / (std::log(static_cast<double>(i)) / std::log(2.0));
  }
  return total;
}

}  // namespace oracle

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "geosearch/bbox.hpp"

namespace geosearch {

enum class SimilarityMethod { None, AreaOverlap, Hausdorff };

std::string_view to_string(SimilarityMethod method) noexcept;

/// Denominator used by area_overlap.
enum class OverlapMode {
  Jaccard,        // area(q ∩ d) / area(q ∪ d)
  QueryCoverage,  // area(q ∩ d) / area(q)
};

/// Spatial score of one document: raw AO fraction or raw HD degrees.
struct SpatialScore {
  double raw = 0.0;
  SimilarityMethod method = SimilarityMethod::None;
  std::optional<double> normalized;

  /// Larger-is-better value fed to normalization (HD is inverted).
  double similarity() const noexcept;
};

/// Closed-box intersection; shared edges and corners count.
bool intersects(const BBox& a, const BBox& b) noexcept;

/// Planar overlap fraction in [0,1]. When the denominator area is zero the
/// result is 1 for identical boxes (or a covered degenerate query) and 0
/// otherwise.
double area_overlap(const BBox& query, const BBox& doc,
                    OverlapMode mode = OverlapMode::Jaccard) noexcept;

/// Euclidean distance from a point to a filled rectangle (0 inside).
double point_box_distance(double x, double y, const BBox& box) noexcept;

/// Symmetric Hausdorff distance between two filled rectangles. The
/// point-to-rectangle distance is convex, so the directed distance is
/// attained at one of the four corners.
double hausdorff(const BBox& a, const BBox& b) noexcept;

/// 1 / (1 + hd).
double hd_to_similarity(double hd);

/// Min-max normalization to [0,1]; a zero range maps every value to 1.
/// Throws Error(EmptyInput) on an empty list.
std::vector<double> normalize(std::span<const double> scores);

}  // namespace geosearch

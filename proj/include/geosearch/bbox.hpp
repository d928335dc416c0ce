#pragma once

#include <json.hpp>

namespace geosearch {

/// Axis-aligned geographic rectangle in degrees. Point and line boxes are
/// allowed; boxes crossing the antimeridian are not representable.
struct BBox {
  double min_x = 0.0;
  double max_x = 0.0;
  double min_y = 0.0;
  double max_y = 0.0;

  /// Validating constructor; throws Error(InvalidArgument) on a bad box.
  static BBox make(double min_x, double max_x, double min_y, double max_y);

  bool valid() const noexcept;
  double width() const noexcept { return max_x - min_x; }
  double height() const noexcept { return max_y - min_y; }
  double area() const noexcept { return width() * height(); }

  /// Smallest box containing both.
  BBox merged(const BBox& other) const noexcept;

  bool operator==(const BBox&) const = default;
};

// {"min_x":..,"max_x":..,"min_y":..,"max_y":..}
void to_json(nlohmann::json& j, const BBox& box);
void from_json(const nlohmann::json& j, BBox& box);

}  // namespace geosearch

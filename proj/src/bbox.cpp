#include "geosearch/bbox.hpp"

#include <algorithm>
#include <cmath>

#include "geosearch/error.hpp"

namespace geosearch {

BBox BBox::make(double min_x, double max_x, double min_y, double max_y) {
  BBox box{min_x, max_x, min_y, max_y};
  if (!box.valid()) {
    throw Error(ErrorCode::InvalidArgument,
                "invalid bbox (" + std::to_string(min_x) + ", " + std::to_string(max_x) +
                    ", " + std::to_string(min_y) + ", " + std::to_string(max_y) + ")");
  }
  return box;
}

bool BBox::valid() const noexcept {
  for (double v : {min_x, max_x, min_y, max_y}) {
    if (!std::isfinite(v)) return false;
  }
  return min_x <= max_x && min_y <= max_y && min_x >= -180.0 && max_x <= 180.0 &&
         min_y >= -90.0 && max_y <= 90.0;
}

BBox BBox::merged(const BBox& other) const noexcept {
  return BBox{std::min(min_x, other.min_x), std::max(max_x, other.max_x),
              std::min(min_y, other.min_y), std::max(max_y, other.max_y)};
}

void to_json(nlohmann::json& j, const BBox& box) {
  j = nlohmann::json{{"min_x", box.min_x},
                     {"max_x", box.max_x},
                     {"min_y", box.min_y},
                     {"max_y", box.max_y}};
}

void from_json(const nlohmann::json& j, BBox& box) {
  box = BBox::make(j.at("min_x").get<double>(), j.at("max_x").get<double>(),
                   j.at("min_y").get<double>(), j.at("max_y").get<double>());
}

}  // namespace geosearch

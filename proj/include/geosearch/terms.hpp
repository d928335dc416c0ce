#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace geosearch {

enum class Relation { Original, Synonym, Hypernym, Hyponym, IsA, MannerOf };

std::string_view to_string(Relation r) noexcept;
std::optional<Relation> parse_relation(std::string_view s) noexcept;

/// A query term with its expansion weight and where it came from.
struct WeightedTerm {
  std::string text;
  double weight = 1.0;
  Relation relation = Relation::Original;

  bool operator==(const WeightedTerm&) const = default;
};

}  // namespace geosearch

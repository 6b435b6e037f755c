#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace foi {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned pixel rectangle. Zero-area boxes are allowed.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  bool valid() const noexcept;
  BoundingBox translated(double dx, double dy) const noexcept {
    return {x_min + dx, y_min + dy, x_max + dx, y_max + dy};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Throws ContractViolation when min > max or a coordinate is not finite.
void require_valid(const BoundingBox& box);

struct Zone {
  BoundingBox box;
  std::string name;
};

inline constexpr std::size_t kDefaultApproachWindow = 5;

double iou(const BoundingBox& a, const BoundingBox& b);
Point center(const BoundingBox& a);

// Closed boundary: a point on the edge is inside.
bool zone_contains(const Zone& zone, const Point& p);

// Euclidean distance from p to the nearest point of the box; 0 inside.
double distance_to_box(const BoundingBox& box, const Point& p);

// True when the last center is inside the zone, or when the distance to the
// zone strictly decreased between the first and the last of the most recent
// `window` centers.
bool approaching(std::span<const Point> centers, const Zone& zone,
                 std::size_t window = kDefaultApproachWindow);

// Parses "x_min,y_min,x_max,y_max", optionally prefixed with "name=".
Zone parse_zone(const std::string& text, const std::string& default_name);

}  // namespace foi

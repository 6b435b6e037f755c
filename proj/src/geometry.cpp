#include "foi/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include "foi/error.hpp"

namespace foi {

bool BoundingBox::valid() const noexcept {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

void require_valid(const BoundingBox& box) {
  if (!box.valid()) {
    throw ContractViolation("invalid bounding box (" + std::to_string(box.x_min) + "," +
                            std::to_string(box.y_min) + "," + std::to_string(box.x_max) +
                            "," + std::to_string(box.y_max) + ")");
  }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  require_valid(a);
  require_valid(b);
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Point center(const BoundingBox& a) {
  require_valid(a);
  return {(a.x_min + a.x_max) / 2.0, (a.y_min + a.y_max) / 2.0};
}

bool zone_contains(const Zone& zone, const Point& p) {
  const auto& z = zone.box;
  return z.x_min <= p.x && p.x <= z.x_max && z.y_min <= p.y && p.y <= z.y_max;
}

double distance_to_box(const BoundingBox& box, const Point& p) {
  const double dx = std::max({box.x_min - p.x, 0.0, p.x - box.x_max});
  const double dy = std::max({box.y_min - p.y, 0.0, p.y - box.y_max});
  return std::hypot(dx, dy);
}

bool approaching(std::span<const Point> centers, const Zone& zone, std::size_t window) {
  if (centers.size() < 2) throw ContractViolation("approaching needs at least 2 centers");
  if (window < 2) throw ContractViolation("approach window must be at least 2");
  if (zone_contains(zone, centers.back())) return true;
  const std::size_t n = std::min(window, centers.size());
  const Point& first = centers[centers.size() - n];
  return distance_to_box(zone.box, centers.back()) < distance_to_box(zone.box, first);
}

Zone parse_zone(const std::string& text, const std::string& default_name) {
  Zone zone;
  std::string coords = text;
  if (auto eq = text.find('='); eq != std::string::npos) {
    zone.name = text.substr(0, eq);
    coords = text.substr(eq + 1);
  } else {
    zone.name = default_name;
  }
  if (zone.name.empty()) throw InputError("zone name is empty in '" + text + "'");

  std::vector<double> values;
  const char* cur = coords.data();
  const char* end = coords.data() + coords.size();
  while (cur <= end) {
    const char* comma = std::find(cur, end, ',');
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cur, comma, v);
    if (ec != std::errc() || ptr != comma) {
      throw InputError("zone '" + text + "' must be x_min,y_min,x_max,y_max");
    }
    values.push_back(v);
    cur = comma + 1;
  }
  if (values.size() != 4) throw InputError("zone '" + text + "' must have 4 coordinates");
  zone.box = {values[0], values[1], values[2], values[3]};
  if (!zone.box.valid()) throw InputError("zone '" + text + "' has min > max");
  return zone;
}

}  // namespace foi

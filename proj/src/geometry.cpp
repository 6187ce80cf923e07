#include "forge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace forge {

bool is_closed(const Ring& ring) { return ring.size() >= 4 && ring.front() == ring.back(); }

double ring_area(const Ring& ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    twice += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
  }
  return std::abs(twice) * 0.5;
}

double polygon_area(const Polygon& poly) {
  if (poly.rings.empty()) return 0.0;
  double area = ring_area(poly.rings.front());
  for (std::size_t i = 1; i < poly.rings.size(); ++i) area -= ring_area(poly.rings[i]);
  return area;
}

BBox bounding_box(const Polygon& poly) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BBox b{inf, inf, -inf, -inf};
  for (const auto& ring : poly.rings) {
    for (const auto& p : ring) {
      b.min_x = std::min(b.min_x, p.x);
      b.min_y = std::min(b.min_y, p.y);
      b.max_x = std::max(b.max_x, p.x);
      b.max_y = std::max(b.max_y, p.y);
    }
  }
  return b;
}

Polygon translated(const Polygon& poly, double dx, double dy) {
  Polygon out = poly;
  for (auto& ring : out.rings) {
    for (auto& p : ring) {
      p.x += dx;
      p.y += dy;
    }
  }
  return out;
}

}  // namespace forge

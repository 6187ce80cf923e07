#pragma once

#include <vector>

namespace forge {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Closed ring: first vertex repeated as the last.
using Ring = std::vector<Point>;

/// Outer ring followed by zero or more holes.
struct Polygon {
  std::vector<Ring> rings;
};

struct BBox {
  double min_x, min_y, max_x, max_y;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  Point center() const { return {(min_x + max_x) * 0.5, (min_y + max_y) * 0.5}; }
};

bool is_closed(const Ring& ring);

/// Unsigned shoelace area of a closed ring.
double ring_area(const Ring& ring);

/// Outer ring area minus hole areas.
double polygon_area(const Polygon& poly);

BBox bounding_box(const Polygon& poly);

Polygon translated(const Polygon& poly, double dx, double dy);

}  // namespace forge

#include "tap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tap {

namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string("bounding box: non-finite ") + what);
  }
}

}  // namespace

BoundingBox::BoundingBox(double x1_, double y1_, double x2_, double y2_)
    : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
  check_finite(x1, "x1");
  check_finite(y1, "y1");
  check_finite(x2, "x2");
  check_finite(y2, "y2");
  if (x1 < 0.0 || y1 < 0.0 || x2 > 1.0 || y2 > 1.0) {
    throw std::invalid_argument("bounding box: coordinates outside [0,1]");
  }
  if (x1 >= x2 || y1 >= y2) {
    throw std::invalid_argument("bounding box: empty or inverted extent");
  }
}

BoundingBox BoundingBox::from_pixels(double px1, double py1, double px2, double py2,
                                     double image_w, double image_h) {
  if (!(image_w > 0.0) || !(image_h > 0.0)) {
    throw std::invalid_argument("bounding box: image dimensions must be positive");
  }
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return BoundingBox(clamp01(px1 / image_w), clamp01(py1 / image_h),
                     clamp01(px2 / image_w), clamp01(py2 / image_h));
}

double BoundingBox::diagonal() const { return std::hypot(width(), height()); }

const char* to_string(RelativePosition p) {
  switch (p) {
    case RelativePosition::On: return "on";
    case RelativePosition::Cover: return "cover";
    case RelativePosition::Overlap: return "overlap";
    case RelativePosition::North: return "north";
    case RelativePosition::NorthEast: return "northeast";
    case RelativePosition::East: return "east";
    case RelativePosition::SouthEast: return "southeast";
    case RelativePosition::South: return "south";
    case RelativePosition::SouthWest: return "southwest";
    case RelativePosition::West: return "west";
    case RelativePosition::NorthWest: return "northwest";
    case RelativePosition::Unrelated: return "unrelated";
  }
  throw std::invalid_argument("unknown relative position");
}

RelativePosition relative_position_from_index(int index) {
  if (index < 0 || index >= kNumRelativePositions) {
    throw std::invalid_argument("relative position index out of range: " +
                                std::to_string(index));
  }
  return static_cast<RelativePosition>(index);
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

double containment_ratio(const BoundingBox& inner, const BoundingBox& outer) {
  return intersection_area(inner, outer) / inner.area();
}

RelativePosition classify_relation(const BoundingBox& object,
                                   const BoundingBox& scene_text,
                                   const RelationThresholds& t) {
  if (containment_ratio(scene_text, object) >= t.on_containment) {
    return RelativePosition::On;
  }
  if (containment_ratio(object, scene_text) >= t.cover_containment) {
    return RelativePosition::Cover;
  }
  if (iou(object, scene_text) >= t.overlap_iou) {
    return RelativePosition::Overlap;
  }

  const double dx = scene_text.center_x() - object.center_x();
  // Flip to y-up so the angle reads as a compass bearing (north = above).
  const double dy = object.center_y() - scene_text.center_y();
  const double dist = std::hypot(dx, dy);
  const double mean_diagonal = 0.5 * (object.diagonal() + scene_text.diagonal());
  if (dist > t.unrelated_distance * mean_diagonal) {
    return RelativePosition::Unrelated;
  }

  // Eight 45-degree sectors centered on east = 0; a tie at a sector edge goes
  // counterclockwise (to the higher angle).
  constexpr double kRadToDeg = 57.295779513082320877;
  double angle = std::atan2(dy, dx) * kRadToDeg;  // (-180, 180]
  double shifted = std::fmod(angle + 22.5 + 360.0, 360.0);
  int sector = static_cast<int>(shifted / 45.0) % 8;
  static constexpr RelativePosition kSectors[8] = {
      RelativePosition::East,  RelativePosition::NorthEast,
      RelativePosition::North, RelativePosition::NorthWest,
      RelativePosition::West,  RelativePosition::SouthWest,
      RelativePosition::South, RelativePosition::SouthEast,
  };
  return kSectors[sector];
}

}  // namespace tap

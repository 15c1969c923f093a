#pragma once

#include <string>

namespace tap {

// Axis-aligned box in normalized image coordinates: 0 <= x1 < x2 <= 1,
// 0 <= y1 < y2 <= 1, with y growing downward (image convention).
// Degenerate (zero-area) boxes are rejected at construction.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  BoundingBox() = default;
  BoundingBox(double x1, double y1, double x2, double y2);

  // Converts pixel coordinates, clamping to the image before validating.
  static BoundingBox from_pixels(double px1, double py1, double px2, double py2,
                                 double image_w, double image_h);

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double diagonal() const;
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
};

// Relative position of a scene-text region with respect to an object region.
// The order is load-bearing: it defines the class indices of the 12-way
// region-prediction head.
enum class RelativePosition {
  On = 0,
  Cover = 1,
  Overlap = 2,
  North = 3,
  NorthEast = 4,
  East = 5,
  SouthEast = 6,
  South = 7,
  SouthWest = 8,
  West = 9,
  NorthWest = 10,
  Unrelated = 11,
};

inline constexpr int kNumRelativePositions = 12;

const char* to_string(RelativePosition p);
RelativePosition relative_position_from_index(int index);

struct RelationThresholds {
  double on_containment = 0.9;     // fraction of the scene-text box inside the object
  double cover_containment = 0.9;  // fraction of the object box inside the scene text
  double overlap_iou = 0.1;
  double unrelated_distance = 3.0;  // in units of the mean box diagonal
};

double intersection_area(const BoundingBox& a, const BoundingBox& b);
double iou(const BoundingBox& a, const BoundingBox& b);

// Fraction of `inner`'s area covered by `outer`.
double containment_ratio(const BoundingBox& inner, const BoundingBox& outer);

// Classifies where the scene-text box sits relative to the object box.
// Decision cascade: On, Cover, Overlap, then Unrelated by center distance,
// otherwise one of the eight compass directions by the angle of the
// center-to-center vector (45-degree sectors centered on the axes; a boundary
// angle goes to the counterclockwise sector).
RelativePosition classify_relation(const BoundingBox& object,
                                   const BoundingBox& scene_text,
                                   const RelationThresholds& thresholds = {});

inline bool is_on(const BoundingBox& object, const BoundingBox& scene_text,
                  const RelationThresholds& thresholds = {}) {
  return classify_relation(object, scene_text, thresholds) == RelativePosition::On;
}

}  // namespace tap

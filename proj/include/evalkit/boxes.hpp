#pragma once

namespace evalkit {

/// Axis-aligned rectangle in pixel coordinates with positive area.
struct BoundingBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  /// Validating factory; throws on non-positive width or height.
  static BoundingBox make(double x_min, double y_min, double x_max, double y_max);

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

struct GroundTruth {
  BoundingBox box;
  int class_id = 0;
};

struct Detection {
  BoundingBox box;
  int class_id = 0;
  double confidence = 0.0;  // in [0, 1]
};

Detection make_detection(const BoundingBox& box, int class_id, double confidence);

}  // namespace evalkit

#include "evalkit/boxes.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace evalkit {

BoundingBox BoundingBox::make(double x_min, double y_min, double x_max, double y_max) {
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw std::invalid_argument("degenerate box [" + std::to_string(x_min) + "," +
                                std::to_string(y_min) + "," + std::to_string(x_max) + "," +
                                std::to_string(y_max) + "]");
  }
  return BoundingBox{x_min, y_min, x_max, y_max};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

Detection make_detection(const BoundingBox& box, int class_id, double confidence) {
  if (confidence < 0.0 || confidence > 1.0) {
    throw std::invalid_argument("detection confidence " + std::to_string(confidence) +
                                " outside [0,1]");
  }
  return Detection{box, class_id, confidence};
}

}  // namespace evalkit

#include "ndkit/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ndkit {

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_str(shape));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

Tensor::Tensor(Shape s) : shape(std::move(s)), data(static_cast<size_t>(shape_numel(shape)), 0.0) {}

Tensor::Tensor(Shape s, double fill)
    : shape(std::move(s)), data(static_cast<size_t>(shape_numel(shape)), fill) {}

Tensor Tensor::from(Shape s, DoubleVec values) {
  if (shape_numel(s) != static_cast<int64_t>(values.size())) {
    throw std::invalid_argument("value count " + std::to_string(values.size()) +
                                " does not match shape " + shape_str(s));
  }
  Tensor t;
  t.shape = std::move(s);
  t.data = std::move(values);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!same_shape(a.shape, b.shape)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + shape_str(a.shape) +
                                " vs " + shape_str(b.shape));
  }
}

}  // namespace ndkit

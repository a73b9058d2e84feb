#pragma once

#include <cstddef>
#include <cstdint>
#include <new>
#include <string>
#include <vector>

namespace ndkit {

using Shape = std::vector<int>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);
bool same_shape(const Shape& a, const Shape& b);

/// 64-byte-aligned allocator. Keeping every numeric buffer at a fixed
/// alignment makes vectorized kernels choose the same code path on every
/// allocation, which keeps results bit-identical across re-runs.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
  template <typename U>
  bool operator!=(const AlignedAllocator<U>&) const { return false; }
};

using DoubleVec = std::vector<double, AlignedAllocator<double>>;

/// Dense rank-N array of 64-bit floats in row-major layout.
struct Tensor {
  Shape shape;
  DoubleVec data;

  Tensor() = default;
  explicit Tensor(Shape s);
  Tensor(Shape s, double fill);
  static Tensor from(Shape s, DoubleVec values);

  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  bool empty() const { return data.empty(); }

  double& at2(int i, int j) { return data[static_cast<size_t>(i) * dim(1) + j]; }
  double at2(int i, int j) const { return data[static_cast<size_t>(i) * dim(1) + j]; }
  double& at3(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * dim(1) + y) * dim(2) + x];
  }
  double at3(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * dim(1) + y) * dim(2) + x];
  }
  double& at4(int b, int c, int y, int x) {
    return data[((static_cast<size_t>(b) * dim(1) + c) * dim(2) + y) * dim(3) + x];
  }
  double at4(int b, int c, int y, int x) const {
    return data[((static_cast<size_t>(b) * dim(1) + c) * dim(2) + y) * dim(3) + x];
  }

  bool all_finite() const;
};

void check_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace ndkit

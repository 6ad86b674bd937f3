#pragma once
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <new>
#include <numeric>
#include <string>
#include <vector>

#include "umt/core/rng.hpp"

namespace umt::nn {

/// 64-byte aligned allocator. All tensor buffers share one alignment class so
/// SIMD kernels peel identically for every allocation; without this, results
/// of the same arithmetic differ at the ULP level between runs depending on
/// where the heap happens to place a buffer, and bitwise determinism breaks.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

using dvec = std::vector<double, AlignedAllocator<double>>;

/// Dense row-major double tensor. Doubles throughout: the gradient checks
/// this project is gated on are not reliable in float32.
struct Tensor {
  std::vector<int> shape;
  dvec data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(count(shape), 0.0) {}
  Tensor(std::vector<int> s, double fill)
      : shape(std::move(s)), data(count(shape), fill) {}

  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= std::size_t(d);
    return n;
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, double v) { return Tensor(std::move(s), v); }
  static Tensor scalar(double v) { return Tensor({1}, v); }

  static Tensor randn(std::vector<int> s, Rng& rng, double stddev = 1.0) {
    Tensor t(std::move(s));
    for (auto& v : t.data) v = rng.normal() * stddev;
    return t;
  }
  static Tensor uniform(std::vector<int> s, Rng& rng, double lo, double hi) {
    Tensor t(std::move(s));
    for (auto& v : t.data) v = rng.uniform(lo, hi);
    return t;
  }

  std::size_t numel() const { return data.size(); }
  int dim(int i) const { return shape[std::size_t(i)]; }
  int ndim() const { return int(shape.size()); }

  /// Rows/cols view of a 2-D tensor.
  int rows() const { return shape[0]; }
  int cols() const { return shape[1]; }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i)
      s += (i ? "," : "") + std::to_string(shape[i]);
    return s + ")";
  }

  Tensor reshaped(std::vector<int> s) const {
    Tensor t;
    t.shape = std::move(s);
    t.data = data;
    return t;
  }
};

}  // namespace umt::nn

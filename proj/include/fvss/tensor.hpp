#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace fvss::nn {

// Dense n-d array of doubles. All training arithmetic is 64-bit so the
// finite-difference tolerances in the gradient tests stay tight.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s)
      : shape(std::move(s)),
        v(std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                          std::multiplies<>()),
          0.0) {}

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

  std::size_t size() const { return v.size(); }
  std::size_t rank() const { return shape.size(); }

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline double dot(const Tensor& a, const Tensor& b, std::size_t offset_a, std::size_t offset_b,
                  std::size_t count) {
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += a.v[offset_a + i] * b.v[offset_b + i];
  return acc;
}

}  // namespace fvss::nn

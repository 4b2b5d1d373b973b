#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace sgvae::ad {

// Dense row-major float64 tensor. Everything in this project is rank 1 or 2
// and tiny, so the shape is a fixed-capacity pair rather than a heap vector.
struct Shape {
  int rank = 0;
  int d0 = 0;
  int d1 = 0;

  Shape() = default;
  Shape(std::initializer_list<int> dims) {
    if (dims.size() > 2) throw std::invalid_argument("Shape: rank > 2");
    rank = static_cast<int>(dims.size());
    auto it = dims.begin();
    if (rank > 0) d0 = *it++;
    if (rank > 1) d1 = *it;
    for (int i = 0; i < rank; ++i) {
      if (dim(i) <= 0) throw std::invalid_argument("Shape: nonpositive dim");
    }
  }

  int dim(int i) const { return i == 0 ? d0 : d1; }
  std::size_t numel() const {
    if (rank == 0) return 1;
    return static_cast<std::size_t>(d0) * (rank > 1 ? d1 : 1);
  }
  bool operator==(const Shape&) const = default;

  std::vector<int> dims() const {
    std::vector<int> v;
    for (int i = 0; i < rank; ++i) v.push_back(dim(i));
    return v;
  }
};

struct Tensor {
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;

  Tensor() = default;
  Tensor(Shape s, double fill = 0.0)
      : shape(s), data(s.numel(), fill) {}
  Tensor(Shape s, std::vector<double> values) : shape(s), data(std::move(values)) {
    if (data.size() != shape.numel())
      throw std::invalid_argument("Tensor: data length does not match shape");
  }

  static Tensor zeros(Shape s) { return Tensor(s); }
  static Tensor scalar(double v) {
    Tensor t(Shape{1});
    t.data[0] = v;
    return t;
  }
  static Tensor vector(std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    return Tensor(Shape{n}, std::move(values));
  }

  std::size_t numel() const { return shape.numel(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool is_scalar() const { return numel() == 1; }
  double value() const {
    if (!is_scalar()) throw std::logic_error("Tensor::value on non-scalar");
    return data[0];
  }
};

}  // namespace sgvae::ad

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgan {

// Thrown when tensor shapes do not line up; the message names both shapes.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a NaN/Inf crosses an op boundary.
struct NotFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by masked_softmax when every entry of the mask is zero.
struct DegenerateMaskError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& s);

// Dense row-major array of 64-bit reals. The single value type that layers,
// environments and checkpoints trade in.
class RealArray {
 public:
  RealArray() = default;

  explicit RealArray(Shape shape) : shape_(std::move(shape)) {
    data_.assign(count(shape_), 0.0);
  }

  RealArray(Shape shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) {
      throw ShapeError("RealArray: data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_to_string(shape_));
    }
  }

  static RealArray scalar(double v) { return RealArray({1}, {v}); }

  static RealArray vec(std::vector<double> v) {
    Shape s{v.size()};
    return RealArray(std::move(s), std::move(v));
  }

  static RealArray matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
    return RealArray({rows, cols}, std::move(data));
  }

  static RealArray zeros_like(const RealArray& other) { return RealArray(other.shape_); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty() && shape_.empty(); }

  std::size_t rows() const { return shape_.at(0); }
  std::size_t cols() const { return shape_.at(1); }

  double& at(std::size_t i) { return data_[i]; }
  double at(std::size_t i) const { return data_[i]; }
  double& at2(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at2(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& at3(std::size_t a, std::size_t b, std::size_t c) {
    return data_[(a * shape_[1] + b) * shape_[2] + c];
  }
  double at3(std::size_t a, std::size_t b, std::size_t c) const {
    return data_[(a * shape_[1] + b) * shape_[2] + c];
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const RealArray& o) const { return shape_ == o.shape_; }

  bool finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  void require_finite(const char* what) const;

 private:
  static std::size_t count(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return s.empty() ? 0 : n;
  }

  Shape shape_;
  std::vector<double> data_;
};

void require_same_shape(const RealArray& a, const RealArray& b, const char* op);
void require_rank(const RealArray& a, std::size_t rank, const char* op);

}  // namespace mgan

#pragma once

#include "emorec/error.hpp"

#include <Eigen/Dense>

#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace emorec::nn {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

/// Dense row-major tensor. Storage is a flat Eigen vector so kernels can map
/// any view onto it without copies.
template <typename Scalar>
class Tensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(Vector::Zero(numel(shape_))) {
    validate_shape();
  }

  Tensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape();
    if (data_.size() != numel(shape_)) {
      throw ShapeError(-1, "tensor data has " + std::to_string(data_.size()) + " values for shape " +
                               shape_string(shape_));
    }
  }

  static Tensor from(Shape shape, std::initializer_list<Scalar> values) {
    Vector v(static_cast<Index>(values.size()));
    Index i = 0;
    for (Scalar x : values) v(i++) = x;
    return Tensor(std::move(shape), std::move(v));
  }

  const Shape& shape() const noexcept { return shape_; }
  Index rank() const noexcept { return static_cast<Index>(shape_.size()); }
  Index size() const noexcept { return data_.size(); }

  Vector& data() noexcept { return data_; }
  const Vector& data() const noexcept { return data_; }

  Scalar& operator[](Index i) { return data_(i); }
  Scalar operator[](Index i) const { return data_(i); }

  bool all_finite() const { return data_.allFinite(); }

  void set_zero() { data_.setZero(); }

  template <typename To>
  Tensor<To> cast() const {
    return Tensor<To>(shape_, data_.template cast<To>());
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void validate_shape() const {
    for (Index d : shape_) {
      if (d <= 0) throw ShapeError(-1, "tensor dimensions must be positive, got " + shape_string(shape_));
    }
  }

  Shape shape_;
  Vector data_;
};

}  // namespace emorec::nn

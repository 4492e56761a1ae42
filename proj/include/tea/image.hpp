#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tea {

/// Channel-major tensor shape (C x H x W).
struct Shape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  [[nodiscard]] std::size_t plane() const { return height * width; }
  [[nodiscard]] std::size_t size() const { return channels * height * width; }
  [[nodiscard]] std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Image-shaped array of unbounded reals (momentum, raw updates).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] std::span<double> data() { return data_; }
  [[nodiscard]] std::span<const double> data() const { return data_; }

  double& operator()(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_.height + i) * shape_.width + j];
  }
  double operator()(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_.height + i) * shape_.width + j];
  }

  /// Moves the storage out, leaving the tensor empty.
  std::vector<double> release() &&;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// C x H x W intensities, every element in [0,1]. Immutable once built;
/// updates go through a Tensor and clamp01().
class Image {
 public:
  Image() = default;
  /// Throws ShapeError on a zero dimension or size mismatch and
  /// ArgumentError when an element is outside [0,1].
  Image(Shape shape, std::vector<double> data);

  static Image filled(Shape shape, double value);

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] std::span<const double> data() const { return data_; }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  double operator()(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_.height + i) * shape_.width + j];
  }

  [[nodiscard]] Tensor to_tensor() const { return Tensor(shape_, data_); }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  struct Trusted {};
  Image(Trusted, Shape shape, std::vector<double> data)
      : shape_(shape), data_(std::move(data)) {}

  friend Image clamp01(Tensor t);

  Shape shape_;
  std::vector<double> data_;
};

/// Row-major H x W real map. Holds gradients, pooled differences, masks
/// and window weights.
class ScalarMap {
 public:
  ScalarMap() = default;
  ScalarMap(std::size_t height, std::size_t width, double fill = 0.0);
  ScalarMap(std::size_t height, std::size_t width, std::vector<double> data);

  [[nodiscard]] std::size_t height() const { return height_; }
  [[nodiscard]] std::size_t width() const { return width_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] std::span<double> data() { return data_; }
  [[nodiscard]] std::span<const double> data() const { return data_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * width_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * width_ + j]; }

  [[nodiscard]] bool same_shape(const ScalarMap& o) const {
    return height_ == o.height_ && width_ == o.width_;
  }

  friend bool operator==(const ScalarMap&, const ScalarMap&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Element-wise clamp into [0,1]. NaN is rejected with ArgumentError.
Image clamp01(Tensor t);

}  // namespace tea

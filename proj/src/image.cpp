#include "tea/image.hpp"

#include <algorithm>
#include <cmath>

#include "tea/error.hpp"

namespace tea {

std::string Shape::str() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match " +
                     shape_.str());
  }
}

std::vector<double> Tensor::release() && {
  shape_ = {};
  return std::move(data_);
}

Image::Image(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (shape_.channels == 0 || shape_.height == 0 || shape_.width == 0) {
    throw ShapeError("image dimensions must be positive, got " + shape_.str());
  }
  if (data_.size() != shape_.size()) {
    throw ShapeError("image data length " + std::to_string(data_.size()) + " does not match " +
                     shape_.str());
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ArgumentError("image value " + std::to_string(v) + " outside [0,1]");
    }
  }
}

Image Image::filled(Shape shape, double value) {
  return Image(shape, std::vector<double>(shape.size(), value));
}

ScalarMap::ScalarMap(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(height * width, fill) {}

ScalarMap::ScalarMap(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != height_ * width_) {
    throw ShapeError("map data length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(height_) + "x" + std::to_string(width_));
  }
}

Image clamp01(Tensor t) {
  const Shape shape = t.shape();
  if (shape.channels == 0 || shape.height == 0 || shape.width == 0) {
    throw ShapeError("image dimensions must be positive, got " + shape.str());
  }
  std::vector<double> data = std::move(t).release();
  for (double& v : data) {
    if (std::isnan(v)) throw ArgumentError("cannot clamp NaN into [0,1]");
    v = std::clamp(v, 0.0, 1.0);
  }
  return Image(Image::Trusted{}, shape, std::move(data));
}

}  // namespace tea

#include "linext/core/types.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

#include "linext/core/error.hpp"

namespace linext {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {
  for (auto d : shape_) {
    if (d == 0) throw ValidationError("tensor dimensions must be positive: " + shape_string(shape_));
  }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  for (auto d : shape_) {
    if (d == 0) throw ValidationError("tensor dimensions must be positive: " + shape_string(shape_));
  }
  if (data_.size() != shape_numel(shape_)) {
    throw ValidationError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape " + shape_string(shape_));
  }
}

Tensor Tensor::uninitialized(std::vector<std::size_t> shape) {
  Tensor t;
  for (auto d : shape) {
    if (d == 0) throw ValidationError("tensor dimensions must be positive: " + shape_string(shape));
  }
  t.data_.resize(shape_numel(shape));
  t.shape_ = std::move(shape);
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw ValidationError("tensor axis out of range");
  return shape_[axis];
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ValidationError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void PointCloud::validate() const {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!is_finite(points_[i])) {
      throw ValidationError("point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
}

Tensor PointCloud::to_tensor() const {
  if (points_.empty()) throw ValidationError("cannot convert an empty cloud to a tensor");
  Tensor t({points_.size(), 3});
  for (std::size_t i = 0; i < points_.size(); ++i) {
    t.at(i, 0) = points_[i].x;
    t.at(i, 1) = points_[i].y;
    t.at(i, 2) = points_[i].z;
  }
  return t;
}

PointCloud PointCloud::from_tensor(const Tensor& t) {
  if (t.rank() != 2 || t.dim(1) != 3) {
    throw ValidationError("expected an N x 3 tensor, got " + shape_string(t.shape()));
  }
  std::vector<Point3> pts(t.dim(0));
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {t.at(i, 0), t.at(i, 1), t.at(i, 2)};
  return PointCloud(std::move(pts));
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  std::vector<Point3> out;
  out.reserve(indices.size());
  for (auto i : indices) {
    if (i >= points_.size()) throw ValidationError("point index out of range");
    out.push_back(points_[i]);
  }
  return PointCloud(std::move(out));
}

Bounds Bounds::of(const PointCloud& cloud) {
  if (cloud.empty()) throw ValidationError("bounds of an empty cloud");
  Bounds b{cloud[0], cloud[0]};
  for (const auto& p : cloud) {
    b.min = {std::min(b.min.x, p.x), std::min(b.min.y, p.y), std::min(b.min.z, p.z)};
    b.max = {std::max(b.max.x, p.x), std::max(b.max.y, p.y), std::max(b.max.z, p.z)};
  }
  return b;
}

}  // namespace linext

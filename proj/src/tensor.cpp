// SPDX-License-Identifier: Apache-2.0
#include "gmvae/tensor.hpp"

#include <cmath>
#include <cstring>

#include "gmvae/errors.hpp"

namespace gmvae {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor Tensor::scalar(double v) {
  return Tensor({}, std::make_shared<const std::vector<double>>(1, v));
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  return full(std::move(shape), 0.0);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  std::size_t n = shape_product(shape);
  return Tensor(std::move(shape), std::make_shared<const std::vector<double>>(n, v));
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> data) {
  if (shape_product(shape) != data.size()) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    throw ShapeError("tensor shape " + s + "] does not match buffer of " +
                     std::to_string(data.size()) + " elements");
  }
  return Tensor(std::move(shape), std::make_shared<const std::vector<double>>(std::move(data)));
}

double Tensor::item() const {
  if (!data_ || data_->size() != 1) {
    throw ContractError("item() requires a single-element tensor, got shape " + shape_str());
  }
  return (*data_)[0];
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ContractError("rows() on tensor of shape " + shape_str());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ContractError("cols() on tensor of shape " + shape_str());
  return shape_[1];
}

double Tensor::at(std::size_t r, std::size_t c) const { return (*data_)[r * cols() + c]; }

bool Tensor::all_finite() const {
  if (!data_) return true;
  for (double v : *data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool Tensor::bit_equal(const Tensor& other) const {
  if (shape_ != other.shape_ || size() != other.size()) return false;
  if (!data_ || !other.data_) return data_ == other.data_;
  return std::memcmp(data_->data(), other.data_->data(), size() * sizeof(double)) == 0;
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace gmvae

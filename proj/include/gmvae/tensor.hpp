// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gmvae {

/// Dense n-dimensional array of doubles, row-major, immutable once built.
/// Copies share the underlying buffer, so passing tensors around is cheap.
/// A scalar is the rank-0 tensor (empty shape, one element).
class Tensor {
 public:
  Tensor() = default;  // empty sentinel: zero elements

  static Tensor scalar(double v);
  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double v);
  /// Takes ownership of `data`; throws ShapeError unless product(shape) == data.size().
  static Tensor from(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_ ? data_->size() : 0; }
  std::size_t rank() const { return shape_.size(); }
  bool empty() const { return !data_; }
  bool is_scalar() const { return data_ && shape_.empty(); }

  /// Value of a scalar tensor; throws ContractError otherwise.
  double item() const;

  std::span<const double> data() const {
    return data_ ? std::span<const double>(*data_) : std::span<const double>();
  }
  double operator[](std::size_t i) const { return (*data_)[i]; }

  /// Rank-2 accessors.
  std::size_t rows() const;
  std::size_t cols() const;
  double at(std::size_t r, std::size_t c) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  bool bit_equal(const Tensor& other) const;

  std::string shape_str() const;

 private:
  Tensor(std::vector<std::size_t> shape, std::shared_ptr<const std::vector<double>> data)
      : shape_(std::move(shape)), data_(std::move(data)) {}

  std::vector<std::size_t> shape_;
  std::shared_ptr<const std::vector<double>> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace gmvae

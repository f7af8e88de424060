// SPDX-License-Identifier: Apache-2.0
#include "gmvae/kernels.hpp"

#include <cmath>

#include "gmvae/parallel.hpp"

namespace gmvae::kernels {

namespace {
// Minimum number of output-row multiply-adds before a parallel region pays.
constexpr std::size_t kParGrain = 8192;

bool go_parallel(std::size_t work) {
#ifdef _OPENMP
  return par::enabled() && work >= kParGrain;
#else
  (void)work;
  return false;
#endif
}
}  // namespace

double sigmoid_scalar(double x) {
  // exp(-|x|) branch avoids overflow for large negative inputs.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

namespace serial {

void affine_fwd(std::span<const double> W, std::span<const double> b,
                std::span<const double> x, std::span<double> y,
                std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* wr = W.data() + i * cols;
    double acc = b[i];
    for (std::size_t j = 0; j < cols; ++j) acc += wr[j] * x[j];
    y[i] = acc;
  }
}

void affine_bwd_x(std::span<const double> W, std::span<const double> dy,
                  std::span<double> dx, std::size_t rows, std::size_t cols) {
  for (std::size_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += W[i * cols + j] * dy[i];
    dx[j] += acc;
  }
}

void affine_bwd_wb(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dW, std::span<double> db,
                   std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    double g = dy[i];
    double* wr = dW.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) wr[j] += g * x[j];
    db[i] += g;
  }
}

void relu_fwd(std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd(std::span<const double> x, std::span<const double> dy, std::span<double> dx) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) dx[i] += dy[i];
  }
}

void sigmoid_fwd(std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid_scalar(x[i]);
}

void sigmoid_bwd(std::span<const double> y, std::span<const double> dy, std::span<double> dx) {
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
}

}  // namespace serial

void affine_fwd(std::span<const double> W, std::span<const double> b,
                std::span<const double> x, std::span<double> y,
                std::size_t rows, std::size_t cols) {
  if (go_parallel(rows * cols)) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(rows); ++i) {
      const double* wr = W.data() + static_cast<std::size_t>(i) * cols;
      double acc = b[i];
      for (std::size_t j = 0; j < cols; ++j) acc += wr[j] * x[j];
      y[i] = acc;
    }
    return;
  }
  serial::affine_fwd(W, b, x, y, rows, cols);
}

void affine_bwd_x(std::span<const double> W, std::span<const double> dy,
                  std::span<double> dx, std::size_t rows, std::size_t cols) {
  if (go_parallel(rows * cols)) {
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < static_cast<long long>(cols); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rows; ++i) acc += W[i * cols + j] * dy[i];
      dx[j] += acc;
    }
    return;
  }
  serial::affine_bwd_x(W, dy, dx, rows, cols);
}

void affine_bwd_wb(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dW, std::span<double> db,
                   std::size_t rows, std::size_t cols) {
  if (go_parallel(rows * cols)) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(rows); ++i) {
      double g = dy[i];
      double* wr = dW.data() + static_cast<std::size_t>(i) * cols;
      for (std::size_t j = 0; j < cols; ++j) wr[j] += g * x[j];
      db[i] += g;
    }
    return;
  }
  serial::affine_bwd_wb(x, dy, dW, db, rows, cols);
}

void relu_fwd(std::span<const double> x, std::span<double> y) { serial::relu_fwd(x, y); }
void relu_bwd(std::span<const double> x, std::span<const double> dy, std::span<double> dx) {
  serial::relu_bwd(x, dy, dx);
}
void sigmoid_fwd(std::span<const double> x, std::span<double> y) { serial::sigmoid_fwd(x, y); }
void sigmoid_bwd(std::span<const double> y, std::span<const double> dy, std::span<double> dx) {
  serial::sigmoid_bwd(y, dy, dx);
}

double squared_l2(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace gmvae::kernels

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>

namespace gmvae::kernels {

// Dense-layer and elementwise kernels. The public functions dispatch to the
// OpenMP implementation when gmvae::par::enabled() and the problem is large
// enough to pay for a parallel region; otherwise they run the serial
// reference in `serial::`. Every parallel loop is over independent output
// elements whose inner sums run serially, so the two paths are bit-identical.

namespace serial {

// y[i] = sum_j W[i,j] * x[j] + b[i];  W is rows x cols row-major.
void affine_fwd(std::span<const double> W, std::span<const double> b,
                std::span<const double> x, std::span<double> y,
                std::size_t rows, std::size_t cols);
// dx[j] = sum_i W[i,j] * dy[i]
void affine_bwd_x(std::span<const double> W, std::span<const double> dy,
                  std::span<double> dx, std::size_t rows, std::size_t cols);
// dW[i,j] += dy[i] * x[j];  db[i] += dy[i]
void affine_bwd_wb(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dW, std::span<double> db,
                   std::size_t rows, std::size_t cols);

void relu_fwd(std::span<const double> x, std::span<double> y);
// dx[i] += dy[i] * (x[i] > 0)
void relu_bwd(std::span<const double> x, std::span<const double> dy, std::span<double> dx);

void sigmoid_fwd(std::span<const double> x, std::span<double> y);
// dx[i] += dy[i] * y[i] * (1 - y[i]);  y is the forward output
void sigmoid_bwd(std::span<const double> y, std::span<const double> dy, std::span<double> dx);

}  // namespace serial

void affine_fwd(std::span<const double> W, std::span<const double> b,
                std::span<const double> x, std::span<double> y,
                std::size_t rows, std::size_t cols);
void affine_bwd_x(std::span<const double> W, std::span<const double> dy,
                  std::span<double> dx, std::size_t rows, std::size_t cols);
void affine_bwd_wb(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dW, std::span<double> db,
                   std::size_t rows, std::size_t cols);
void relu_fwd(std::span<const double> x, std::span<double> y);
void relu_bwd(std::span<const double> x, std::span<const double> dy, std::span<double> dx);
void sigmoid_fwd(std::span<const double> x, std::span<double> y);
void sigmoid_bwd(std::span<const double> y, std::span<const double> dy, std::span<double> dx);

// Reductions run serially in both paths: they are O(n) and a fixed
// summation order keeps results independent of the backend.
double squared_l2(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

// Stable elementwise sigmoid; never overflows, output strictly in (0,1).
double sigmoid_scalar(double x);

}  // namespace gmvae::kernels

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "gmvae/tensor.hpp"

namespace gmvae {

/// Central-difference gradient of a scalar-valued function, one forward
/// pair per coordinate: (fn(x + h e_i) - fn(x - h e_i)) / (2h).
/// Uses only forward evaluation, so it is an oracle independent of the
/// tape's backward pass. Throws std::invalid_argument unless h > 0.
Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& fn, const Tensor& x,
                            double h);

}  // namespace gmvae

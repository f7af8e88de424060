// SPDX-License-Identifier: Apache-2.0
#include "gmvae/finite_diff.hpp"

#include <stdexcept>
#include <vector>

namespace gmvae {

Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& fn, const Tensor& x,
                            double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be positive");
  std::vector<double> base(x.data().begin(), x.data().end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> probe = base;
    probe[i] = base[i] + h;
    double up = fn(Tensor::from(x.shape(), std::move(probe)));
    probe = base;
    probe[i] = base[i] - h;
    double down = fn(Tensor::from(x.shape(), std::move(probe)));
    grad[i] = (up - down) / (2.0 * h);
  }
  return Tensor::from(x.shape(), std::move(grad));
}

}  // namespace gmvae

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "gmvae/model.hpp"
#include "gmvae/selector.hpp"

namespace gmvae {

struct InversionConfig {
  std::size_t steps = 300;
  double initial_step = 0.05;
  /// Starting latent points; when empty, all mixture means are used.
  std::vector<Tensor> starts;
};

struct InversionStart {
  Tensor z_star;
  double recon_error = 0.0;
  std::vector<double> trace;
};

struct InversionResult {
  std::vector<InversionStart> starts;
  std::size_t winner = 0;  // minimal final error, ties to the lowest index
  Decision decision;
};

/// Backtracking gradient descent on ||decode(z) - x||^2 from z_init.
/// Returns the best-seen iterate; never worse than the initialization.
std::pair<Tensor, double> invert_decoder(const GmvaeModel& m, const Tensor& x,
                                         const Tensor& z_init, const InversionConfig& cfg);

/// Multi-start inversion (independent runs, merged in index order) plus the
/// threshold decision on the winner.
InversionResult reclassify_full(const GmvaeModel& m, const Thresholds& t, const Tensor& x,
                                const InversionConfig& cfg = {});

/// Label = nearest mean to the winning z*; Accepted only if z* passes the
/// tau_enc check against that mean and the final error passes tau_dec,
/// otherwise Rejected as a fooling sample.
Decision reclassify(const GmvaeModel& m, const Thresholds& t, const Tensor& x);

/// Same pipeline, but the winner's label is returned unconditionally.
std::size_t reclassify_accept_always(const GmvaeModel& m, const Tensor& x);

}  // namespace gmvae

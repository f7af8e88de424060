// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "gmvae/model.hpp"
#include "gmvae/training.hpp"

namespace gmvae {

/// Acceptance thresholds for the selective classifier.
struct Thresholds {
  double tau_enc = 0.0;      // ceiling on squared Mahalanobis latent distance
  double tau_dec = 0.0;      // ceiling on reconstruction error
  double confidence_p = 0.0; // calibration confidence that produced tau_enc
};

enum class RejectReason { none, latent_outlier, reconstruction_outlier, both };

const char* reject_reason_name(RejectReason r);

/// Outcome of selective classification. Rejected decisions keep the
/// candidate label and both distances as diagnostics.
struct Decision {
  bool accepted = false;
  std::size_t label = 0;
  RejectReason reason = RejectReason::none;
  Tensor z_mean;
  double mahalanobis_sq = 0.0;
  double recon_error = 0.0;
};

/// Nearest-mean label of the encoding; ties break to the lowest class index.
std::size_t classify(const GmvaeModel& m, const Tensor& x);

/// ||z - mu||^2 / variance (isotropic covariance).
double mahalanobis_sq(const Tensor& z, const Tensor& mu, double variance);

/// p-quantile of the chi-square distribution with `dof` degrees of freedom,
/// to absolute error <= 1e-6 (bisection on the regularized incomplete
/// gamma). Throws std::invalid_argument unless 0 < p < 1 and dof >= 1.
double chi_square_critical(std::size_t dof, double p);

/// Regularized lower incomplete gamma P(a, x); the chi-square CDF is
/// P(dof/2, x/2). Exposed for reuse and direct testing.
double regularized_gamma_p(double a, double x);

/// tau_enc = chi_square_critical(d, p); tau_dec = mean + 3 stddev of the
/// training reconstruction errors.
Thresholds calibrate(const TrainStats& stats, std::size_t d, double p);

/// Label by nearest mean, then accept only if the encoding lies within
/// tau_enc Mahalanobis distance of that mean and the reconstruction error
/// is at most tau_dec.
Decision selective_classify(const GmvaeModel& m, const Thresholds& t, const Tensor& x);

/// Decision record as a JSON string:
/// {"verdict":..,"label":..,"reason":..,"mahalanobis_sq":..,"recon_error":..}
std::string decision_to_json(const Decision& d);

}  // namespace gmvae

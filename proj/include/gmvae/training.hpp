// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmvae/data.hpp"
#include "gmvae/model.hpp"

namespace gmvae {

struct TrainConfig {
  double alpha = 1.0;  // trade-off between reconstruction and latent terms
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 64;
  std::size_t epochs = 60;
  std::uint64_t rng_seed = 1;
  bool semi_supervised = false;
  std::optional<std::size_t> labeled_per_class;
  std::vector<std::size_t> enc_hidden = {128, 64};
  std::vector<std::size_t> dec_hidden = {64, 128};
  std::size_t latent_dim = 0;  // 0 -> num_classes
  double noise_variance = 1.0 / 3000.0;
  double prior_variance = 0.0;  // 0 -> noise_variance
  std::string progress_csv;     // optional path for the per-epoch CSV copy
  bool quiet = false;           // suppress the per-epoch stdout records

  void validate() const;
};

/// Statistics collected while training; the selector calibrates its
/// thresholds from these.
struct TrainStats {
  std::vector<double> epoch_mean_loss;
  std::vector<double> epoch_mean_recon;
  std::vector<double> epoch_mean_latent;
  // Final-epoch per-sample values over the training set, index-aligned with
  // the dataset. latent_sq_distances uses the true-class mean for labeled
  // samples and the nearest mean otherwise; recon uses the noiseless
  // composition that the selector thresholds.
  std::vector<double> latent_sq_distances;
  std::vector<double> recon_errors;
  std::size_t labeled_loss_evals = 0;
  std::size_t unlabeled_loss_evals = 0;
};

/// Eq-style supervised loss: ||x - g(f(x)+eps)||^2 + alpha ||f(x) - mu_y||^2.
double supervised_loss(const GmvaeModel& m, const Tensor& x, std::size_t label,
                       const Tensor& eps, double alpha);

/// Unlabeled loss: ||x - g(f(x)+eps)||^2 + alpha * softmin_c ||f(x) - mu_c||^2
/// with softmin(v) = -log sum_c exp(-v_c), the mixture prior term up to an
/// additive constant.
double unlabeled_loss(const GmvaeModel& m, const Tensor& x, const Tensor& eps, double alpha);

// Tape builders for the two losses; used by the training loop and by the
// gradient tests. `x` and eps enter as constants, parameters via `bound`.
// Both terms of the loss stay addressable so they can be logged per sample.
struct LossNodes {
  NodeId loss;
  NodeId recon_term;
  NodeId latent_term;  // squared distance (supervised) or softmin (unlabeled)
};
LossNodes supervised_loss_nodes(Tape& tape, const GmvaeModel& m, const BoundModel& bound,
                                NodeId x, std::size_t label, const Tensor& eps, double alpha);
LossNodes unlabeled_loss_nodes(Tape& tape, const GmvaeModel& m, const BoundModel& bound,
                               NodeId x, const Tensor& eps, double alpha);

/// Flat view of the model parameters in a fixed order: encoder layers
/// (W, b) then decoder layers (W, b). Gradient vectors and Adam state are
/// index-aligned with this order.
std::vector<Tensor*> model_params(GmvaeModel& m);

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t t = 0;
};

AdamState make_adam_state(const std::vector<Tensor*>& params);

/// Standard bias-corrected Adam update, in place.
void adam_step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads, AdamState& state,
               const TrainConfig& cfg);

/// Full training run. Deterministic in (seed, config, data); per-example
/// loss gradients are evaluated in parallel and reduced in index order.
std::pair<GmvaeModel, TrainStats> train(const Dataset& data, const TrainConfig& cfg);

}  // namespace gmvae

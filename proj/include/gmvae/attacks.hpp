// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "gmvae/model.hpp"
#include "gmvae/selector.hpp"

namespace gmvae {

enum class NormOrder { l2, linf };

/// How the quadratic latent term of the white-box objectives weights the
/// deviation from the target mean. The inverse-covariance form is the
/// Mahalanobis penalty; the covariance form is the literal product with
/// the (isotropic) covariance and is kept as a switch.
enum class LatentWeighting { inverse_covariance, covariance };

struct AttackConfig {
  double epsilon = 0.3;       // L-inf budget for fgsm/pgd/mim
  double eta_penalty = 1.0;   // weight on ||eta||^2 in the white-box objective
  std::size_t steps = 0;      // 0 -> per-attack default (pgd/mim 40, white-box 500)
  double step_size = 0.0;     // 0 -> 2.5 * epsilon / steps for pgd/mim
  double exponent_a = 2.0;    // reconstruction-term exponent, > 1
  double exponent_b = 2.0;    // latent-term exponent, > 1
  double momentum_decay = 1.0;
  std::uint64_t rng_seed = 0;
  NormOrder p_norm = NormOrder::linf;
  LatentWeighting latent_weighting = LatentWeighting::inverse_covariance;

  void validate() const;
  std::size_t iterative_steps() const { return steps ? steps : 40; }
  std::size_t whitebox_steps() const { return steps ? steps : 500; }
  double iterative_step_size() const {
    return step_size > 0.0 ? step_size : 2.5 * epsilon / static_cast<double>(iterative_steps());
  }
};

struct AttackResult {
  Tensor x_adv;
  Tensor eta;  // x_adv - x (or x_adv itself for fooling images)
  Decision decision;
  std::vector<double> objective_trace;
};

/// Surrogate classification loss for the encoder-only attacks:
/// cross-entropy of softmax over logits l_c = -||f(x) - mu_c||^2.
double encoder_attack_loss(const GmvaeModel& m, const Tensor& x, std::size_t y_true);

/// d encoder_attack_loss / d x.
Tensor encoder_attack_loss_grad(const GmvaeModel& m, const Tensor& x, std::size_t y_true);

/// x_adv = clip(x + epsilon * sign(grad)), single step.
AttackResult fgsm(const GmvaeModel& m, const Thresholds& t, const Tensor& x, std::size_t y_true,
                  double epsilon);

/// Iterated ascent on encoder_attack_loss, projected to the epsilon ball
/// around x and to [0,1] each step.
AttackResult pgd(const GmvaeModel& m, const Thresholds& t, const Tensor& x, std::size_t y_true,
                 const AttackConfig& cfg);

/// PGD with the step direction replaced by accumulated L1-normalized
/// gradient momentum.
AttackResult momentum_iterative(const GmvaeModel& m, const Thresholds& t, const Tensor& x,
                                std::size_t y_true, const AttackConfig& cfg);

/// Full white-box targeted objective as a function of the perturbation:
///   (recon(x_o+eta)/tau_dec)^a + (latent_quad(x_o+eta, mu_t)/tau_enc)^b
///   + eta_penalty * ||eta||^2
double whitebox_adversarial_objective(const GmvaeModel& m, const Thresholds& t, const Tensor& x_o,
                                      std::size_t target, const Tensor& eta,
                                      const AttackConfig& cfg);

/// Fooling objective: the image itself is the variable and there is no
/// perturbation penalty.
double whitebox_fooling_objective(const GmvaeModel& m, const Thresholds& t, const Tensor& image,
                                  std::size_t target, const AttackConfig& cfg);

/// Gradient descent with backtracking on the adversarial objective, eta
/// starting at zero, x_o + eta kept inside [0,1]. Accepted steps never
/// increase the objective.
AttackResult whitebox_adversarial(const GmvaeModel& m, const Thresholds& t, const Tensor& x_o,
                                  std::size_t target, const AttackConfig& cfg);

/// Same optimizer on the fooling objective from a uniform random image.
AttackResult whitebox_fooling(const GmvaeModel& m, const Thresholds& t, std::size_t target,
                              const AttackConfig& cfg);

}  // namespace gmvae

// SPDX-License-Identifier: Apache-2.0
#include "gmvae/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmvae/errors.hpp"
#include "gmvae/kernels.hpp"
#include "gmvae/rng.hpp"

namespace gmvae {

void AttackConfig::validate() const {
  if (epsilon < 0.0) throw std::invalid_argument("attack config: epsilon must be nonnegative");
  if (!(exponent_a > 1.0) || !(exponent_b > 1.0)) {
    throw std::invalid_argument("attack config: exponents must be > 1");
  }
  if (!(momentum_decay > 0.0 && momentum_decay <= 1.0)) {
    throw std::invalid_argument("attack config: momentum decay must lie in (0,1]");
  }
  if (eta_penalty < 0.0) throw std::invalid_argument("attack config: eta penalty must be nonnegative");
}

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

// Loss graph for the encoder surrogate: v_y - softmin(v), with
// v_c = ||f(x) - mu_c||^2. Equals cross-entropy of softmax(-v) at y.
NodeId encoder_loss_node(Tape& tape, const GmvaeModel& m, const BoundModel& bound, NodeId x,
                         std::size_t y_true) {
  NodeId z = encode_node(tape, m, bound, x);
  std::vector<NodeId> sq;
  sq.reserve(m.prior.num_classes);
  for (std::size_t c = 0; c < m.prior.num_classes; ++c) {
    sq.push_back(tape.squared_l2(z, tape.constant(m.prior.means[c])));
  }
  return tape.sub(sq[y_true], tape.soft_min(tape.stack(sq)));
}

double latent_quad_scale(const GmvaeModel& m, const AttackConfig& cfg) {
  return cfg.latent_weighting == LatentWeighting::inverse_covariance
             ? 1.0 / m.prior.variance
             : m.prior.variance;
}

// Shared white-box objective graph. `image` is x_o + eta for the targeted
// attack and the image itself for fooling; `eta` is null for fooling.
NodeId whitebox_objective_node(Tape& tape, const GmvaeModel& m, const BoundModel& bound,
                               const Thresholds& t, NodeId image, std::size_t target,
                               NodeId eta, const AttackConfig& cfg) {
  NodeId z = encode_node(tape, m, bound, image);
  NodeId recon = decode_node(tape, m, bound, z);
  NodeId recon_term =
      tape.pow_scalar(tape.scale(tape.squared_l2(image, recon), 1.0 / t.tau_dec), cfg.exponent_a);
  NodeId latent_sq = tape.squared_l2(tape.constant(m.prior.means[target]), z);
  NodeId latent_term = tape.pow_scalar(
      tape.scale(latent_sq, latent_quad_scale(m, cfg) / t.tau_enc), cfg.exponent_b);
  NodeId obj = tape.add(recon_term, latent_term);
  if (eta >= 0 && cfg.eta_penalty > 0.0) {
    NodeId zero = tape.constant(Tensor::zeros(tape.value(eta).shape()));
    obj = tape.add(obj, tape.scale(tape.squared_l2(eta, zero), cfg.eta_penalty));
  }
  return obj;
}

struct ObjectiveEval {
  double value;
  Tensor grad;  // with respect to the optimization variable
};

}  // namespace

double encoder_attack_loss(const GmvaeModel& m, const Tensor& x, std::size_t y_true) {
  Tape tape;
  BoundModel bound = bind_model(tape, m, false);
  return tape.value(encoder_loss_node(tape, m, bound, tape.constant(x), y_true)).item();
}

Tensor encoder_attack_loss_grad(const GmvaeModel& m, const Tensor& x, std::size_t y_true) {
  Tape tape;
  BoundModel bound = bind_model(tape, m, false);
  NodeId xid = tape.leaf(x, true);
  NodeId loss = encoder_loss_node(tape, m, bound, xid, y_true);
  return tape.backward(loss).at(xid);
}

AttackResult fgsm(const GmvaeModel& m, const Thresholds& t, const Tensor& x, std::size_t y_true,
                  double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("fgsm: epsilon must be nonnegative");
  Tensor grad = encoder_attack_loss_grad(m, x, y_true);
  std::vector<double> adv(x.size()), eta(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double sign = grad[i] > 0.0 ? 1.0 : (grad[i] < 0.0 ? -1.0 : 0.0);
    adv[i] = clip01(x[i] + epsilon * sign);
    eta[i] = adv[i] - x[i];
  }
  AttackResult r;
  r.x_adv = Tensor::from(x.shape(), std::move(adv));
  r.eta = Tensor::from(x.shape(), std::move(eta));
  r.objective_trace = {encoder_attack_loss(m, x, y_true), encoder_attack_loss(m, r.x_adv, y_true)};
  r.decision = selective_classify(m, t, r.x_adv);
  return r;
}

namespace {

// Shared loop for pgd and mim; `momentum` enables the accumulated
// normalized-gradient direction.
AttackResult iterative_encoder_attack(const GmvaeModel& m, const Thresholds& t, const Tensor& x,
                                      std::size_t y_true, const AttackConfig& cfg,
                                      bool momentum) {
  cfg.validate();
  std::size_t steps = cfg.iterative_steps();
  if (steps == 0) throw std::invalid_argument("iterative attack: steps must be >= 1");
  double step = cfg.iterative_step_size();

  std::vector<double> cur(x.data().begin(), x.data().end());
  std::vector<double> accum(x.size(), 0.0);
  AttackResult r;
  for (std::size_t it = 0; it < steps; ++it) {
    Tensor xt = Tensor::from(x.shape(), std::vector<double>(cur));
    r.objective_trace.push_back(encoder_attack_loss(m, xt, y_true));
    Tensor grad = encoder_attack_loss_grad(m, xt, y_true);

    std::span<const double> dir;
    if (momentum) {
      double l1 = 0.0;
      for (double g : grad.data()) l1 += std::abs(g);
      double inv = l1 > 0.0 ? 1.0 / l1 : 0.0;
      for (std::size_t i = 0; i < accum.size(); ++i) {
        accum[i] = cfg.momentum_decay * accum[i] + grad[i] * inv;
      }
      dir = accum;
    } else {
      dir = grad.data();
    }

    for (std::size_t i = 0; i < cur.size(); ++i) {
      double sign = dir[i] > 0.0 ? 1.0 : (dir[i] < 0.0 ? -1.0 : 0.0);
      cur[i] += step * sign;
    }
    // project to the budget ball around x, then to the pixel box
    if (cfg.p_norm == NormOrder::linf) {
      for (std::size_t i = 0; i < cur.size(); ++i) {
        cur[i] = clip01(std::clamp(cur[i], x[i] - cfg.epsilon, x[i] + cfg.epsilon));
      }
    } else {
      double norm = 0.0;
      for (std::size_t i = 0; i < cur.size(); ++i) {
        double d = cur[i] - x[i];
        norm += d * d;
      }
      norm = std::sqrt(norm);
      double scale = norm > cfg.epsilon && norm > 0.0 ? cfg.epsilon / norm : 1.0;
      for (std::size_t i = 0; i < cur.size(); ++i) {
        cur[i] = clip01(x[i] + (cur[i] - x[i]) * scale);
      }
    }
  }
  r.x_adv = Tensor::from(x.shape(), std::move(cur));
  std::vector<double> eta(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) eta[i] = r.x_adv[i] - x[i];
  r.eta = Tensor::from(x.shape(), std::move(eta));
  r.objective_trace.push_back(encoder_attack_loss(m, r.x_adv, y_true));
  r.decision = selective_classify(m, t, r.x_adv);
  return r;
}

}  // namespace

AttackResult pgd(const GmvaeModel& m, const Thresholds& t, const Tensor& x, std::size_t y_true,
                 const AttackConfig& cfg) {
  return iterative_encoder_attack(m, t, x, y_true, cfg, false);
}

AttackResult momentum_iterative(const GmvaeModel& m, const Thresholds& t, const Tensor& x,
                                std::size_t y_true, const AttackConfig& cfg) {
  return iterative_encoder_attack(m, t, x, y_true, cfg, true);
}

double whitebox_adversarial_objective(const GmvaeModel& m, const Thresholds& t, const Tensor& x_o,
                                      std::size_t target, const Tensor& eta,
                                      const AttackConfig& cfg) {
  Tape tape;
  BoundModel bound = bind_model(tape, m, false);
  NodeId eta_id = tape.constant(eta);
  NodeId image = tape.add(tape.constant(x_o), eta_id);
  return tape.value(whitebox_objective_node(tape, m, bound, t, image, target, eta_id, cfg)).item();
}

double whitebox_fooling_objective(const GmvaeModel& m, const Thresholds& t, const Tensor& image,
                                  std::size_t target, const AttackConfig& cfg) {
  Tape tape;
  BoundModel bound = bind_model(tape, m, false);
  NodeId img = tape.constant(image);
  return tape.value(whitebox_objective_node(tape, m, bound, t, img, target, -1, cfg)).item();
}

namespace {

// Objective value and gradient with respect to eta (targeted) or the image
// (fooling) in one tape pass.
ObjectiveEval eval_whitebox(const GmvaeModel& m, const Thresholds& t, const Tensor& x_o,
                            bool fooling, const Tensor& var, std::size_t target,
                            const AttackConfig& cfg) {
  Tape tape;
  BoundModel bound = bind_model(tape, m, false);
  NodeId var_id = tape.leaf(var, true);
  NodeId image = fooling ? var_id : tape.add(tape.constant(x_o), var_id);
  NodeId obj =
      whitebox_objective_node(tape, m, bound, t, image, target, fooling ? -1 : var_id, cfg);
  Gradients grads = tape.backward(obj);
  return {tape.value(obj).item(), grads.at(var_id)};
}

// Backtracking gradient descent. The candidate step is projected into the
// feasible box before evaluation, and only objective-non-increasing steps
// are accepted, so the recorded trace is non-increasing.
AttackResult descend_whitebox(const GmvaeModel& m, const Thresholds& t, const Tensor& x_o,
                              bool fooling, Tensor var0, std::size_t target,
                              const AttackConfig& cfg) {
  cfg.validate();
  if (target >= m.prior.num_classes) {
    throw std::invalid_argument("whitebox attack: target class out of range");
  }
  std::size_t steps = cfg.whitebox_steps();
  Tensor var = std::move(var0);
  auto objective = [&](const Tensor& v) {
    return fooling ? whitebox_fooling_objective(m, t, v, target, cfg)
                   : whitebox_adversarial_objective(m, t, x_o, target, v, cfg);
  };
  auto project = [&](std::vector<double> v) {
    if (fooling) {
      for (double& c : v) c = clip01(c);
    } else {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = clip01(x_o[i] + v[i]) - x_o[i];
    }
    return Tensor::from(var.shape(), std::move(v));
  };

  double obj = objective(var);
  AttackResult r;
  r.objective_trace.push_back(obj);
  double lr = 1e-3;
  for (std::size_t it = 0; it < steps; ++it) {
    ObjectiveEval eval = eval_whitebox(m, t, x_o, fooling, var, target, cfg);
    bool accepted = false;
    for (int tries = 0; tries < 80 && lr > 1e-14; ++tries) {
      std::vector<double> cand(var.size());
      for (std::size_t i = 0; i < var.size(); ++i) cand[i] = var[i] - lr * eval.grad[i];
      Tensor cand_t = project(std::move(cand));
      double cand_obj = objective(cand_t);
      if (std::isfinite(cand_obj) && cand_obj <= obj) {
        var = std::move(cand_t);
        obj = cand_obj;
        lr *= 1.3;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    r.objective_trace.push_back(obj);
    if (!accepted) break;  // no admissible step left at the smallest rate
  }

  if (fooling) {
    r.x_adv = var;
    r.eta = var;
  } else {
    std::vector<double> adv(var.size());
    for (std::size_t i = 0; i < var.size(); ++i) adv[i] = clip01(x_o[i] + var[i]);
    r.x_adv = Tensor::from(var.shape(), std::move(adv));
    r.eta = var;
  }
  r.decision = selective_classify(m, t, r.x_adv);
  return r;
}

}  // namespace

AttackResult whitebox_adversarial(const GmvaeModel& m, const Thresholds& t, const Tensor& x_o,
                                  std::size_t target, const AttackConfig& cfg) {
  return descend_whitebox(m, t, x_o, false, Tensor::zeros(x_o.shape()), target, cfg);
}

AttackResult whitebox_fooling(const GmvaeModel& m, const Thresholds& t, std::size_t target,
                              const AttackConfig& cfg) {
  Rng rng(mix_seed(cfg.rng_seed, 0xf001));
  std::vector<double> img(m.input_dim);
  for (double& v : img) v = rng.u01();
  return descend_whitebox(m, t, Tensor{}, true, Tensor::from({m.input_dim}, std::move(img)),
                          target, cfg);
}

}  // namespace gmvae

// SPDX-License-Identifier: Apache-2.0
#include "gmvae/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "gmvae/errors.hpp"
#include "gmvae/kernels.hpp"
#include "gmvae/parallel.hpp"

namespace gmvae {

void TrainConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("train config: alpha must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("train config: betas must lie in (0,1)");
  }
  if (batch_size == 0 || epochs == 0) {
    throw std::invalid_argument("train config: batch_size and epochs must be positive");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning rate must be positive");
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("train config: noise variance must be nonnegative");
}

double supervised_loss(const GmvaeModel& m, const Tensor& x, std::size_t label,
                       const Tensor& eps, double alpha) {
  if (label >= m.prior.num_classes) {
    throw std::invalid_argument("supervised_loss: unknown label " + std::to_string(label) +
                                " for " + std::to_string(m.prior.num_classes) + " classes");
  }
  Tensor z_mean = encode(m, x);
  std::vector<double> z(z_mean.data().begin(), z_mean.data().end());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += eps[i];
  Tensor recon = decode(m, Tensor::from(z_mean.shape(), std::move(z)));
  double recon_term = kernels::squared_l2(x.data(), recon.data());
  double latent_term = kernels::squared_l2(z_mean.data(), m.prior.means[label].data());
  return recon_term + alpha * latent_term;
}

double unlabeled_loss(const GmvaeModel& m, const Tensor& x, const Tensor& eps, double alpha) {
  Tensor z_mean = encode(m, x);
  std::vector<double> z(z_mean.data().begin(), z_mean.data().end());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += eps[i];
  Tensor recon = decode(m, Tensor::from(z_mean.shape(), std::move(z)));
  double recon_term = kernels::squared_l2(x.data(), recon.data());
  // softmin over squared distances to all component means.
  double mn = 1e308;
  std::vector<double> sq(m.prior.num_classes);
  for (std::size_t c = 0; c < m.prior.num_classes; ++c) {
    sq[c] = kernels::squared_l2(z_mean.data(), m.prior.means[c].data());
    mn = std::min(mn, sq[c]);
  }
  double s = 0.0;
  for (double v : sq) s += std::exp(-(v - mn));
  return recon_term + alpha * (mn - std::log(s));
}

LossNodes supervised_loss_nodes(Tape& tape, const GmvaeModel& m, const BoundModel& bound,
                                NodeId x, std::size_t label, const Tensor& eps, double alpha) {
  if (label >= m.prior.num_classes) {
    throw std::invalid_argument("supervised_loss: unknown label " + std::to_string(label) +
                                " for " + std::to_string(m.prior.num_classes) + " classes");
  }
  NodeId z_mean = encode_node(tape, m, bound, x);
  NodeId z = tape.add(z_mean, tape.constant(eps));
  NodeId recon = decode_node(tape, m, bound, z);
  NodeId recon_term = tape.squared_l2(x, recon);
  NodeId latent_term = tape.squared_l2(z_mean, tape.constant(m.prior.means[label]));
  return {tape.add(recon_term, tape.scale(latent_term, alpha)), recon_term, latent_term};
}

LossNodes unlabeled_loss_nodes(Tape& tape, const GmvaeModel& m, const BoundModel& bound,
                               NodeId x, const Tensor& eps, double alpha) {
  NodeId z_mean = encode_node(tape, m, bound, x);
  NodeId z = tape.add(z_mean, tape.constant(eps));
  NodeId recon = decode_node(tape, m, bound, z);
  NodeId recon_term = tape.squared_l2(x, recon);
  std::vector<NodeId> sq;
  sq.reserve(m.prior.num_classes);
  for (std::size_t c = 0; c < m.prior.num_classes; ++c) {
    sq.push_back(tape.squared_l2(z_mean, tape.constant(m.prior.means[c])));
  }
  NodeId prior_term = tape.soft_min(tape.stack(sq));
  return {tape.add(recon_term, tape.scale(prior_term, alpha)), recon_term, prior_term};
}

std::vector<Tensor*> model_params(GmvaeModel& m) {
  std::vector<Tensor*> params;
  for (Mlp* mlp : {&m.encoder, &m.decoder}) {
    for (DenseLayer& layer : mlp->layers) {
      params.push_back(&layer.W);
      params.push_back(&layer.b);
    }
  }
  return params;
}

AdamState make_adam_state(const std::vector<Tensor*>& params) {
  AdamState state;
  for (const Tensor* p : params) {
    state.m.push_back(Tensor::zeros(p->shape()));
    state.v.push_back(Tensor::zeros(p->shape()));
  }
  return state;
}

void adam_step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads, AdamState& state,
               const TrainConfig& cfg) {
  if (grads.size() != params.size()) {
    throw ShapeError("adam_step: " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(params.size()) + " parameters");
  }
  state.t += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    require_same_shape(*params[p], grads[p], "adam_step");
    std::size_t n = params[p]->size();
    std::vector<double> nm(n), nv(n), np(n);
    auto mp = state.m[p].data();
    auto vp = state.v[p].data();
    auto gp = grads[p].data();
    auto pp = params[p]->data();
    for (std::size_t i = 0; i < n; ++i) {
      nm[i] = cfg.beta1 * mp[i] + (1.0 - cfg.beta1) * gp[i];
      nv[i] = cfg.beta2 * vp[i] + (1.0 - cfg.beta2) * gp[i] * gp[i];
      double mhat = nm[i] / bc1;
      double vhat = nv[i] / bc2;
      np[i] = pp[i] - cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
    state.m[p] = Tensor::from(params[p]->shape(), std::move(nm));
    state.v[p] = Tensor::from(params[p]->shape(), std::move(nv));
    *params[p] = Tensor::from(params[p]->shape(), std::move(np));
  }
}

namespace {

// Per-example gradient extraction aligned with model_params() order.
std::vector<Tensor> aligned_grads(const Tape& tape, const BoundModel& bound,
                                  const Gradients& grads, const GmvaeModel& m) {
  std::vector<Tensor> out;
  auto pull = [&](const MlpLeaves& leaves, const Mlp& mlp) {
    for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
      for (NodeId id : {leaves.W[li], leaves.b[li]}) {
        if (grads.contains(id)) {
          out.push_back(grads.at(id));
        } else {
          out.push_back(Tensor::zeros(tape.value(id).shape()));
        }
      }
    }
  };
  pull(bound.encoder, m.encoder);
  pull(bound.decoder, m.decoder);
  return out;
}

}  // namespace

std::pair<GmvaeModel, TrainStats> train(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (data.num_classes == 0) throw std::invalid_argument("train: dataset has no classes");

  Dataset ds = data;
  if (cfg.semi_supervised && cfg.labeled_per_class.has_value()) {
    ds = split_semi_supervised(ds, *cfg.labeled_per_class, mix_seed(cfg.rng_seed, 2));
  }

  std::size_t k = ds.num_classes;
  std::size_t d = cfg.latent_dim == 0 ? k : cfg.latent_dim;
  double prior_var = cfg.prior_variance == 0.0 ? cfg.noise_variance : cfg.prior_variance;

  Rng init_rng(mix_seed(cfg.rng_seed, 0));
  GmvaeModel model = make_model(ds.input_dim(), cfg.enc_hidden, cfg.dec_hidden, k, d,
                                cfg.noise_variance, prior_var, init_rng);

  std::vector<Tensor*> params = model_params(model);
  AdamState adam = make_adam_state(params);
  TrainStats stats;

  Rng order_rng(mix_seed(cfg.rng_seed, 1));
  Rng eps_rng(mix_seed(cfg.rng_seed, 3));
  double noise_sd = std::sqrt(cfg.noise_variance);

  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::ofstream csv;
  if (!cfg.progress_csv.empty()) {
    csv.open(cfg.progress_csv, std::ios::trunc);
    if (!csv) throw std::runtime_error("train: cannot open " + cfg.progress_csv);
    csv << "schema_version,epoch,mean_loss,mean_recon,mean_latent\n";
  }

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0, recon_sum = 0.0, latent_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t count = std::min(cfg.batch_size, order.size() - start);

      // Noise is drawn serially in batch-index order so results do not
      // depend on the execution schedule of the parallel section below.
      std::vector<Tensor> eps(count);
      for (std::size_t b = 0; b < count; ++b) {
        std::vector<double> e(d);
        for (double& v : e) v = noise_sd * eps_rng.gaussian();
        eps[b] = Tensor::from({d}, std::move(e));
      }

      struct Slot {
        std::vector<Tensor> grads;
        double loss = 0.0;
        double recon = 0.0;
        double latent = 0.0;
        bool labeled = false;
      };
      std::vector<Slot> slots(count);

      par::for_each_index(count, [&](std::size_t b) {
        std::size_t idx = order[start + b];
        Tape tape;
        BoundModel bound = bind_model(tape, model, true);
        NodeId x = tape.constant(ds.images[idx]);
        LossNodes loss;
        Slot& slot = slots[b];
        if (ds.labels[idx].has_value()) {
          loss = supervised_loss_nodes(tape, model, bound, x, *ds.labels[idx], eps[b], cfg.alpha);
          slot.labeled = true;
        } else {
          loss = unlabeled_loss_nodes(tape, model, bound, x, eps[b], cfg.alpha);
        }
        slot.loss = tape.value(loss.loss).item();
        slot.recon = tape.value(loss.recon_term).item();
        slot.latent = tape.value(loss.latent_term).item();
        slot.grads = aligned_grads(tape, bound, tape.backward(loss.loss), model);
      });

      // Fixed-order reduction; mean over the batch.
      std::vector<Tensor> batch_grads;
      for (std::size_t p = 0; p < params.size(); ++p) {
        std::vector<double> acc(params[p]->size(), 0.0);
        for (std::size_t b = 0; b < count; ++b) {
          auto g = slots[b].grads[p].data();
          for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
        }
        double inv = 1.0 / static_cast<double>(count);
        for (double& v : acc) v *= inv;
        batch_grads.push_back(Tensor::from(params[p]->shape(), std::move(acc)));
      }
      adam_step(params, batch_grads, adam, cfg);

      for (const Slot& slot : slots) {
        loss_sum += slot.loss;
        recon_sum += slot.recon;
        latent_sum += slot.latent;
        if (slot.labeled) {
          stats.labeled_loss_evals += 1;
        } else {
          stats.unlabeled_loss_evals += 1;
        }
      }
    }

    double n = static_cast<double>(ds.size());
    stats.epoch_mean_loss.push_back(loss_sum / n);
    stats.epoch_mean_recon.push_back(recon_sum / n);
    stats.epoch_mean_latent.push_back(latent_sum / n);
    if (!cfg.quiet) {
      std::printf("epoch %zu mean_loss %.6f mean_recon %.6f mean_latent %.6f\n", epoch,
                  stats.epoch_mean_loss.back(), stats.epoch_mean_recon.back(),
                  stats.epoch_mean_latent.back());
      std::fflush(stdout);
    }
    if (csv.is_open()) {
      char line[160];
      std::snprintf(line, sizeof line, "1,%zu,%.17g,%.17g,%.17g\n", epoch,
                    stats.epoch_mean_loss.back(), stats.epoch_mean_recon.back(),
                    stats.epoch_mean_latent.back());
      csv << line;
    }
  }

  // Final-epoch per-sample statistics: noiseless reconstruction (what the
  // selector thresholds) and squared latent distance to the true-class
  // mean, nearest mean for unlabeled samples.
  stats.latent_sq_distances.assign(ds.size(), 0.0);
  stats.recon_errors.assign(ds.size(), 0.0);
  par::for_each_index(ds.size(), [&](std::size_t i) {
    Tensor z = encode(model, ds.images[i]);
    Tensor recon = decode(model, z);
    stats.recon_errors[i] = kernels::squared_l2(ds.images[i].data(), recon.data());
    double sq;
    if (ds.labels[i].has_value()) {
      sq = kernels::squared_l2(z.data(), model.prior.means[*ds.labels[i]].data());
    } else {
      sq = 1e308;
      for (const Tensor& mu : model.prior.means) {
        sq = std::min(sq, kernels::squared_l2(z.data(), mu.data()));
      }
    }
    stats.latent_sq_distances[i] = sq;
  });

  return {std::move(model), std::move(stats)};
}

}  // namespace gmvae

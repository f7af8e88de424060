// SPDX-License-Identifier: Apache-2.0
#include "gmvae/model.hpp"

#include <cmath>
#include <stdexcept>

#include "gmvae/errors.hpp"
#include "gmvae/kernels.hpp"

namespace gmvae {

MixturePrior MixturePrior::one_hot(std::size_t k, std::size_t d, double variance) {
  if (k == 0) throw std::invalid_argument("mixture prior: k must be positive");
  if (d < k) {
    throw std::invalid_argument("mixture prior: latent_dim " + std::to_string(d) +
                                " must be >= num_classes " + std::to_string(k));
  }
  if (!(variance > 0.0)) throw std::invalid_argument("mixture prior: variance must be positive");
  MixturePrior p;
  p.num_classes = k;
  p.latent_dim = d;
  p.variance = variance;
  p.means.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> mu(d, 0.0);
    mu[c] = 1.0;
    p.means.push_back(Tensor::from({d}, std::move(mu)));
  }
  p.class_weights.assign(k, 1.0 / static_cast<double>(k));
  return p;
}

NoiseSpec::NoiseSpec(std::size_t dim, double variance) : dim_(dim), variance_(variance) {
  if (dim == 0) throw std::invalid_argument("noise spec: dim must be positive");
  if (variance < 0.0) throw std::invalid_argument("noise spec: variance must be nonnegative");
}

namespace {

DenseLayer init_layer(std::size_t out_w, std::size_t in_w, Rng& rng) {
  // He initialization for the ReLU stacks.
  double scale = std::sqrt(2.0 / static_cast<double>(in_w));
  std::vector<double> w(out_w * in_w);
  for (double& v : w) v = scale * rng.gaussian();
  return {Tensor::from({out_w, in_w}, std::move(w)), Tensor::zeros({out_w})};
}

Mlp init_mlp(std::size_t in_dim, std::span<const std::size_t> hidden, std::size_t out_dim,
             Mlp::Output output, Rng& rng) {
  Mlp mlp;
  mlp.output = output;
  std::size_t prev = in_dim;
  for (std::size_t w : hidden) {
    mlp.layers.push_back(init_layer(w, prev, rng));
    prev = w;
  }
  mlp.layers.push_back(init_layer(out_dim, prev, rng));
  return mlp;
}

}  // namespace

GmvaeModel make_model(std::size_t input_dim, std::span<const std::size_t> enc_hidden,
                      std::span<const std::size_t> dec_hidden, std::size_t k, std::size_t d,
                      double noise_variance, double prior_variance, Rng& rng) {
  GmvaeModel m{
      init_mlp(input_dim, enc_hidden, d, Mlp::Output::identity, rng),
      init_mlp(d, dec_hidden, input_dim, Mlp::Output::sigmoid, rng),
      MixturePrior::one_hot(k, d, prior_variance),
      NoiseSpec(d, noise_variance),
      input_dim,
  };
  return m;
}

Tensor mlp_forward(const Mlp& mlp, const Tensor& x) {
  if (x.size() != mlp.in_dim()) {
    throw ShapeError("mlp input " + x.shape_str() + " does not match first layer width " +
                     std::to_string(mlp.in_dim()));
  }
  std::vector<double> cur(x.data().begin(), x.data().end());
  for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
    const DenseLayer& layer = mlp.layers[li];
    std::vector<double> next(layer.W.rows());
    kernels::affine_fwd(layer.W.data(), layer.b.data(), cur, next, layer.W.rows(),
                        layer.W.cols());
    bool last = li + 1 == mlp.layers.size();
    if (!last) {
      kernels::relu_fwd(next, next);
    } else if (mlp.output == Mlp::Output::sigmoid) {
      kernels::sigmoid_fwd(next, next);
    }
    cur = std::move(next);
  }
  return Tensor::from({mlp.out_dim()}, std::move(cur));
}

Tensor encode(const GmvaeModel& m, const Tensor& x) { return mlp_forward(m.encoder, x); }
Tensor decode(const GmvaeModel& m, const Tensor& z) { return mlp_forward(m.decoder, z); }

Tensor sample_latent(const Tensor& z_mean, const NoiseSpec& noise, Rng& rng) {
  double sd = std::sqrt(noise.variance());
  std::vector<double> z(z_mean.data().begin(), z_mean.data().end());
  for (double& v : z) v += sd * rng.gaussian();
  return Tensor::from(z_mean.shape(), std::move(z));
}

double reconstruction_error(const GmvaeModel& m, const Tensor& x) {
  Tensor recon = decode(m, encode(m, x));
  return kernels::squared_l2(x.data(), recon.data());
}

double mixture_log_density(const MixturePrior& prior, double variance, const Tensor& z) {
  if (z.size() != prior.latent_dim) {
    throw ShapeError("mixture_log_density: z " + z.shape_str() + " vs latent dim " +
                     std::to_string(prior.latent_dim));
  }
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::size_t d = prior.latent_dim;
  double log_norm = -0.5 * static_cast<double>(d) * std::log(kTwoPi * variance);
  // log sum_c exp(log w_c + log N_c), shifted by the max exponent.
  std::vector<double> exponents(prior.num_classes);
  double m = -1e308;
  for (std::size_t c = 0; c < prior.num_classes; ++c) {
    double sq = kernels::squared_l2(z.data(), prior.means[c].data());
    exponents[c] = std::log(prior.class_weights[c]) + log_norm - 0.5 * sq / variance;
    m = std::max(m, exponents[c]);
  }
  double s = 0.0;
  for (double e : exponents) s += std::exp(e - m);
  return m + std::log(s);
}

MlpLeaves bind_mlp(Tape& tape, const Mlp& mlp, bool params_require_grad) {
  MlpLeaves leaves;
  for (const DenseLayer& layer : mlp.layers) {
    leaves.W.push_back(tape.leaf(layer.W, params_require_grad));
    leaves.b.push_back(tape.leaf(layer.b, params_require_grad));
  }
  return leaves;
}

BoundModel bind_model(Tape& tape, const GmvaeModel& m, bool params_require_grad) {
  return {bind_mlp(tape, m.encoder, params_require_grad),
          bind_mlp(tape, m.decoder, params_require_grad)};
}

NodeId mlp_forward_node(Tape& tape, const Mlp& mlp, const MlpLeaves& leaves, NodeId x) {
  NodeId cur = x;
  for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
    cur = tape.affine(cur, leaves.W[li], leaves.b[li]);
    bool last = li + 1 == mlp.layers.size();
    if (!last) {
      cur = tape.relu(cur);
    } else if (mlp.output == Mlp::Output::sigmoid) {
      cur = tape.sigmoid(cur);
    }
  }
  return cur;
}

NodeId encode_node(Tape& tape, const GmvaeModel& m, const BoundModel& bound, NodeId x) {
  return mlp_forward_node(tape, m.encoder, bound.encoder, x);
}

NodeId decode_node(Tape& tape, const GmvaeModel& m, const BoundModel& bound, NodeId z) {
  return mlp_forward_node(tape, m.decoder, bound.decoder, z);
}

}  // namespace gmvae

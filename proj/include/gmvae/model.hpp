// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmvae/rng.hpp"
#include "gmvae/tape.hpp"
#include "gmvae/tensor.hpp"

namespace gmvae {

/// Gaussian mixture over the latent space: one component per class, mean
/// of component c the one-hot vector e_c zero-padded to the latent
/// dimension, shared isotropic variance, uniform weights.
struct MixturePrior {
  std::size_t num_classes = 0;
  std::size_t latent_dim = 0;
  double variance = 0.0;
  std::vector<Tensor> means;
  std::vector<double> class_weights;

  static MixturePrior one_hot(std::size_t k, std::size_t d, double variance);
};

/// Fixed isotropic sampling noise for the reparameterized latent draw.
/// The variance is set at construction and cannot change afterwards; this
/// is what keeps the entropy of the encoder distribution constant.
class NoiseSpec {
 public:
  NoiseSpec(std::size_t dim, double variance);
  std::size_t dim() const { return dim_; }
  double variance() const { return variance_; }

 private:
  std::size_t dim_;
  double variance_;
};

struct DenseLayer {
  Tensor W;  // rows = out width, cols = in width
  Tensor b;  // rows
};

/// Stack of affine layers with ReLU between them. The output activation
/// applies to the last layer only.
struct Mlp {
  enum class Output { identity, sigmoid };
  std::vector<DenseLayer> layers;
  Output output = Output::identity;

  std::size_t in_dim() const { return layers.front().W.cols(); }
  std::size_t out_dim() const { return layers.back().W.rows(); }
};

struct GmvaeModel {
  Mlp encoder;   // input_dim -> latent_dim, linear output
  Mlp decoder;   // latent_dim -> input_dim, sigmoid output
  MixturePrior prior;
  NoiseSpec noise;
  std::size_t input_dim = 0;
};

/// Fresh model with He-initialized weights, zero biases.
GmvaeModel make_model(std::size_t input_dim, std::span<const std::size_t> enc_hidden,
                      std::span<const std::size_t> dec_hidden, std::size_t k, std::size_t d,
                      double noise_variance, double prior_variance, Rng& rng);

Tensor mlp_forward(const Mlp& mlp, const Tensor& x);

/// Mean of the encoder distribution; deterministic.
Tensor encode(const GmvaeModel& m, const Tensor& x);
/// Reconstruction from a latent point; every coordinate in (0,1).
Tensor decode(const GmvaeModel& m, const Tensor& z);

/// z_mean + eps with eps ~ N(0, variance * I) from the given source.
Tensor sample_latent(const Tensor& z_mean, const NoiseSpec& noise, Rng& rng);

/// Squared L2 between x and decode(encode(x)); the noiseless composition,
/// so accept/reject decisions are reproducible.
double reconstruction_error(const GmvaeModel& m, const Tensor& x);

/// log sum_c w_c N(z; mu_c, variance*I), via log-sum-exp.
double mixture_log_density(const MixturePrior& prior, double variance, const Tensor& z);

// ---- tape builders ------------------------------------------------------
// Parameters are bound as tape leaves once per tape; forward passes then
// reference the bound ids, so one backward() yields input and parameter
// gradients together.

struct MlpLeaves {
  std::vector<NodeId> W;
  std::vector<NodeId> b;
};

struct BoundModel {
  MlpLeaves encoder;
  MlpLeaves decoder;
};

MlpLeaves bind_mlp(Tape& tape, const Mlp& mlp, bool params_require_grad);
BoundModel bind_model(Tape& tape, const GmvaeModel& m, bool params_require_grad);
NodeId mlp_forward_node(Tape& tape, const Mlp& mlp, const MlpLeaves& leaves, NodeId x);
NodeId encode_node(Tape& tape, const GmvaeModel& m, const BoundModel& bound, NodeId x);
NodeId decode_node(Tape& tape, const GmvaeModel& m, const BoundModel& bound, NodeId z);

}  // namespace gmvae

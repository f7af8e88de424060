// SPDX-License-Identifier: Apache-2.0
#include "gmvae/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "gmvae/errors.hpp"

namespace gmvae {

namespace {

constexpr char kMagic[4] = {'G', 'M', 'V', 'A'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("checkpoint: truncated file");
  }
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) {
    throw std::runtime_error("checkpoint: truncated file");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_mlp(std::ostream& os, const Mlp& mlp) {
  put_u32(os, static_cast<std::uint32_t>(mlp.layers.size()));
  for (const DenseLayer& layer : mlp.layers) {
    put_u32(os, static_cast<std::uint32_t>(layer.W.rows()));
    put_u32(os, static_cast<std::uint32_t>(layer.W.cols()));
    for (double v : layer.W.data()) put_f64(os, v);
    for (double v : layer.b.data()) put_f64(os, v);
  }
}

Mlp get_mlp(std::istream& is, Mlp::Output output) {
  Mlp mlp;
  mlp.output = output;
  std::uint32_t count = get_u32(is);
  for (std::uint32_t li = 0; li < count; ++li) {
    std::uint32_t rows = get_u32(is);
    std::uint32_t cols = get_u32(is);
    std::vector<double> w(static_cast<std::size_t>(rows) * cols);
    for (double& v : w) v = get_f64(is);
    std::vector<double> b(rows);
    for (double& v : b) v = get_f64(is);
    mlp.layers.push_back({Tensor::from({rows, cols}, std::move(w)), Tensor::from({rows}, std::move(b))});
  }
  return mlp;
}

}  // namespace

void save_checkpoint(const std::string& path, const GmvaeModel& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(model.input_dim));
  put_u32(os, static_cast<std::uint32_t>(model.prior.latent_dim));
  put_u32(os, static_cast<std::uint32_t>(model.prior.num_classes));
  put_f64(os, model.noise.variance());
  put_f64(os, model.prior.variance);
  put_mlp(os, model.encoder);
  put_mlp(os, model.decoder);
  for (const Tensor& mu : model.prior.means) {
    for (double v : mu.data()) put_f64(os, v);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

GmvaeModel load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  std::uint32_t version = get_u32(is);
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  std::uint32_t input_dim = get_u32(is);
  std::uint32_t d = get_u32(is);
  std::uint32_t k = get_u32(is);
  double noise_var = get_f64(is);
  double prior_var = get_f64(is);

  Mlp encoder = get_mlp(is, Mlp::Output::identity);
  Mlp decoder = get_mlp(is, Mlp::Output::sigmoid);

  MixturePrior prior;
  prior.num_classes = k;
  prior.latent_dim = d;
  prior.variance = prior_var;
  prior.class_weights.assign(k, 1.0 / static_cast<double>(k));
  for (std::uint32_t c = 0; c < k; ++c) {
    std::vector<double> mu(d);
    for (double& v : mu) v = get_f64(is);
    prior.means.push_back(Tensor::from({d}, std::move(mu)));
  }

  GmvaeModel model{std::move(encoder), std::move(decoder), std::move(prior),
                   NoiseSpec(d, noise_var), input_dim};
  if (model.encoder.out_dim() != d || model.decoder.out_dim() != input_dim) {
    throw std::runtime_error("checkpoint: inconsistent layer widths in " + path);
  }
  return model;
}

}  // namespace gmvae

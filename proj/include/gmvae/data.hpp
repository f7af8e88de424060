// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmvae/tensor.hpp"

namespace gmvae {

/// Image-classification dataset. Pixels are in [0,1]; a missing label marks
/// an unlabeled sample. Labels are 0-based class indices.
struct Dataset {
  std::vector<Tensor> images;
  std::vector<std::optional<std::size_t>> labels;
  std::size_t num_classes = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return images.size(); }
  std::size_t input_dim() const { return rows * cols; }
  std::size_t labeled_count() const;
};

struct SyntheticSpec {
  std::size_t num_classes = 4;
  std::size_t per_class = 500;
  std::size_t side = 16;          // square images, side >= 4
  double noise_amplitude = 0.1;   // in [0, 0.5]
  std::uint64_t seed = 7;
};

/// Number of distinct stroke prototypes available to gen_synthetic.
std::size_t synthetic_prototype_count();

/// Noise-free prototype image of one class at the given side length.
Tensor synthetic_prototype(std::size_t cls, std::size_t side);

/// Deterministic synthetic dataset: per class a fixed stroke prototype plus
/// uniform pixel noise of the given amplitude, clipped to [0,1] and
/// quantized to the 1/255 grid so IDX export round-trips exactly.
Dataset gen_synthetic(const SyntheticSpec& spec);

/// Standard big-endian IDX pair (images magic 0x00000803, labels 0x00000801,
/// unsigned bytes). Pixels map to [0,1] as v/255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Inverse of load_idx; requires every label present and pixels on the
/// 1/255 grid (they are rounded to the nearest step).
void write_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path);

/// Keeps exactly labeled_per_class labels per class (seeded uniform choice
/// without replacement) and removes the rest. Images and order unchanged.
Dataset split_semi_supervised(const Dataset& ds, std::size_t labeled_per_class,
                              std::uint64_t seed);

}  // namespace gmvae

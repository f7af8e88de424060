// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "gmvae/model.hpp"

namespace gmvae {

// Binary checkpoint, little-endian throughout:
//   "GMVA"  magic
//   u32     format version (1)
//   u32     input_dim, u32 latent_dim, u32 num_classes
//   f64     noise variance, f64 prior variance
//   u32     encoder layer count, then per layer:
//             u32 rows, u32 cols, rows*cols f64 weights (row-major), rows f64 biases
//   u32     decoder layer count, then decoder layers in the same form
//   k * d   f64 mixture means
// Writing and re-reading a model reproduces the file byte for byte.

void save_checkpoint(const std::string& path, const GmvaeModel& model);
GmvaeModel load_checkpoint(const std::string& path);

}  // namespace gmvae

// SPDX-License-Identifier: Apache-2.0
#include "gmvae/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "gmvae/errors.hpp"
#include "gmvae/rng.hpp"

namespace gmvae {

std::size_t Dataset::labeled_count() const {
  std::size_t n = 0;
  for (const auto& l : labels) {
    if (l.has_value()) ++n;
  }
  return n;
}

namespace {

constexpr double kBackground = 0.12;
constexpr double kStroke = 0.85;

// Stroke painters on a side x side canvas. Coordinates scale with the side
// length so every prototype stays distinct down to side = 4.
void paint(std::vector<double>& img, std::size_t side, std::size_t r, std::size_t c) {
  img[r * side + c] = kStroke;
}

void hbar(std::vector<double>& img, std::size_t side, std::size_t row) {
  for (std::size_t c = 0; c < side; ++c) paint(img, side, row, c);
}

void vbar(std::vector<double>& img, std::size_t side, std::size_t col) {
  for (std::size_t r = 0; r < side; ++r) paint(img, side, r, col);
}

void diag_main(std::vector<double>& img, std::size_t side) {
  for (std::size_t r = 0; r < side; ++r) paint(img, side, r, r);
}

void diag_anti(std::vector<double>& img, std::size_t side) {
  for (std::size_t r = 0; r < side; ++r) paint(img, side, r, side - 1 - r);
}

void box(std::vector<double>& img, std::size_t side) {
  for (std::size_t i = 0; i < side; ++i) {
    paint(img, side, 0, i);
    paint(img, side, side - 1, i);
    paint(img, side, i, 0);
    paint(img, side, i, side - 1);
  }
}

void center_square(std::vector<double>& img, std::size_t side) {
  std::size_t lo = side / 4, hi = side - side / 4;
  for (std::size_t r = lo; r < hi; ++r) {
    for (std::size_t c = lo; c < hi; ++c) paint(img, side, r, c);
  }
}

}  // namespace

std::size_t synthetic_prototype_count() { return 10; }

Tensor synthetic_prototype(std::size_t cls, std::size_t side) {
  if (cls >= synthetic_prototype_count()) {
    throw std::invalid_argument("synthetic prototype: class " + std::to_string(cls) +
                                " exceeds the " + std::to_string(synthetic_prototype_count()) +
                                " available prototypes");
  }
  if (side < 4) throw std::invalid_argument("synthetic prototype: side must be >= 4");
  std::vector<double> img(side * side, kBackground);
  switch (cls) {
    case 0: hbar(img, side, side / 2); break;
    case 1: vbar(img, side, side / 2); break;
    case 2: diag_main(img, side); break;
    case 3:
      hbar(img, side, side / 2);
      vbar(img, side, side / 2);
      break;  // cross
    case 4: box(img, side); break;
    case 5:
      diag_main(img, side);
      diag_anti(img, side);
      break;  // X
    case 6: center_square(img, side); break;
    case 7:
      hbar(img, side, side / 4);
      hbar(img, side, side - 1 - side / 4);
      break;
    case 8:
      vbar(img, side, side / 4);
      vbar(img, side, side - 1 - side / 4);
      break;
    case 9: diag_anti(img, side); break;
  }
  return Tensor::from({side * side}, std::move(img));
}

namespace {

double quantize255(double v) { return std::round(v * 255.0) / 255.0; }

}  // namespace

Dataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.num_classes == 0 || spec.per_class == 0) {
    throw std::invalid_argument("gen_synthetic: classes and per_class must be positive");
  }
  if (spec.num_classes > synthetic_prototype_count()) {
    throw std::invalid_argument("gen_synthetic: only " +
                                std::to_string(synthetic_prototype_count()) +
                                " prototypes available, requested " +
                                std::to_string(spec.num_classes));
  }
  if (spec.side < 4) throw std::invalid_argument("gen_synthetic: side must be >= 4");
  if (spec.noise_amplitude < 0.0 || spec.noise_amplitude > 0.5) {
    throw std::invalid_argument("gen_synthetic: noise amplitude must be in [0, 0.5]");
  }

  Dataset ds;
  ds.num_classes = spec.num_classes;
  ds.rows = ds.cols = spec.side;
  Rng rng(mix_seed(spec.seed, 0x5da7a));
  std::size_t dim = spec.side * spec.side;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    Tensor proto = synthetic_prototype(c, spec.side);
    for (std::size_t s = 0; s < spec.per_class; ++s) {
      std::vector<double> img(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        double v = proto[i] + spec.noise_amplitude * rng.uniform(-1.0, 1.0);
        img[i] = quantize255(std::clamp(v, 0.0, 1.0));
      }
      ds.images.push_back(Tensor::from({dim}, std::move(img)));
      ds.labels.push_back(c);
    }
  }
  return ds;
}

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw IdxError(IdxError::Kind::truncated, "idx: truncated header in " + path);
  }
  return static_cast<std::uint32_t>(b[0]) << 24 | static_cast<std::uint32_t>(b[1]) << 16 |
         static_cast<std::uint32_t>(b[2]) << 8 | static_cast<std::uint32_t>(b[3]);
}

void write_be32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw IdxError(IdxError::Kind::io, "idx: cannot open " + images_path);
  std::uint32_t magic = read_be32(imgs, images_path);
  if (magic != kImagesMagic) {
    throw IdxError(IdxError::Kind::bad_magic,
                   "idx: bad image magic 0x" + std::to_string(magic) + " in " + images_path);
  }
  std::uint32_t count = read_be32(imgs, images_path);
  std::uint32_t rows = read_be32(imgs, images_path);
  std::uint32_t cols = read_be32(imgs, images_path);

  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw IdxError(IdxError::Kind::io, "idx: cannot open " + labels_path);
  std::uint32_t lmagic = read_be32(labs, labels_path);
  if (lmagic != kLabelsMagic) {
    throw IdxError(IdxError::Kind::bad_magic,
                   "idx: bad label magic 0x" + std::to_string(lmagic) + " in " + labels_path);
  }
  std::uint32_t lcount = read_be32(labs, labels_path);
  if (lcount != count) {
    throw IdxError(IdxError::Kind::count_mismatch,
                   "idx: " + std::to_string(count) + " images in " + images_path + " but " +
                       std::to_string(lcount) + " labels in " + labels_path);
  }

  std::size_t dim = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> pixel_buf(dim);
  Dataset ds;
  ds.rows = rows;
  ds.cols = cols;
  std::size_t max_label = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!imgs.read(reinterpret_cast<char*>(pixel_buf.data()), static_cast<std::streamsize>(dim))) {
      throw IdxError(IdxError::Kind::truncated,
                     "idx: truncated image data at sample " + std::to_string(i) + " in " +
                         images_path);
    }
    std::vector<double> img(dim);
    for (std::size_t p = 0; p < dim; ++p) img[p] = pixel_buf[p] / 255.0;
    ds.images.push_back(Tensor::from({dim}, std::move(img)));

    unsigned char label;
    if (!labs.read(reinterpret_cast<char*>(&label), 1)) {
      throw IdxError(IdxError::Kind::truncated,
                     "idx: truncated label data at sample " + std::to_string(i) + " in " +
                         labels_path);
    }
    ds.labels.push_back(static_cast<std::size_t>(label));
    max_label = std::max(max_label, static_cast<std::size_t>(label));
  }
  ds.num_classes = count == 0 ? 0 : max_label + 1;
  return ds;
}

void write_idx(const Dataset& ds, const std::string& images_path,
               const std::string& labels_path) {
  std::ofstream imgs(images_path, std::ios::binary | std::ios::trunc);
  if (!imgs) throw IdxError(IdxError::Kind::io, "idx: cannot open " + images_path + " for writing");
  write_be32(imgs, kImagesMagic);
  write_be32(imgs, static_cast<std::uint32_t>(ds.size()));
  write_be32(imgs, static_cast<std::uint32_t>(ds.rows));
  write_be32(imgs, static_cast<std::uint32_t>(ds.cols));
  std::vector<unsigned char> buf(ds.input_dim());
  for (const Tensor& img : ds.images) {
    for (std::size_t p = 0; p < buf.size(); ++p) {
      buf[p] = static_cast<unsigned char>(std::lround(img[p] * 255.0));
    }
    imgs.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!imgs) throw IdxError(IdxError::Kind::io, "idx: write failed for " + images_path);

  std::ofstream labs(labels_path, std::ios::binary | std::ios::trunc);
  if (!labs) throw IdxError(IdxError::Kind::io, "idx: cannot open " + labels_path + " for writing");
  write_be32(labs, kLabelsMagic);
  write_be32(labs, static_cast<std::uint32_t>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.labels[i].has_value()) {
      throw std::invalid_argument("write_idx: sample " + std::to_string(i) + " has no label");
    }
    unsigned char b = static_cast<unsigned char>(*ds.labels[i]);
    labs.write(reinterpret_cast<const char*>(&b), 1);
  }
  if (!labs) throw IdxError(IdxError::Kind::io, "idx: write failed for " + labels_path);
}

Dataset split_semi_supervised(const Dataset& ds, std::size_t labeled_per_class,
                              std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i].has_value()) by_class[*ds.labels[i]].push_back(i);
  }
  std::vector<bool> keep(ds.size(), false);
  Rng rng(mix_seed(seed, 0x59117));
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    if (idx.size() < labeled_per_class) {
      throw std::invalid_argument("split_semi_supervised: class " + std::to_string(c) + " has " +
                                  std::to_string(idx.size()) + " samples, need " +
                                  std::to_string(labeled_per_class));
    }
    rng.shuffle(idx);
    for (std::size_t j = 0; j < labeled_per_class; ++j) keep[idx[j]] = true;
  }
  Dataset out = ds;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!keep[i]) out.labels[i].reset();
  }
  return out;
}

}  // namespace gmvae

#pragma once

#include <cstdint>
#include <vector>

#include "landcover/ann.hpp"
#include "landcover/raster.hpp"

namespace landcover {

// Blockwise synthetic scene: the image is tiled with blocks, each block gets
// a class, and its pixels are drawn per-band from that class's distribution
// (uniform, mean +- spread, rounded and clamped to the u8 range).
struct SynthConfig {
  std::size_t width = 128;
  std::size_t height = 128;
  std::size_t bands = 3;
  std::size_t classes = 5;
  std::size_t block = 16;
  double spread = 2.0;
  // classes x bands; empty selects evenly spaced defaults.
  std::vector<std::vector<double>> means;
  std::uint64_t seed = 0;
  // Stripes give each block row one class, so row statistics vary across the
  // scene; grid cycles classes over blocks in scan order.
  bool grid_layout = false;

  void validate() const;
};

struct SynthScene {
  Raster raster;
  LabelMap truth;
  SignatureSet signatures;
};

std::vector<std::vector<double>> default_class_means(std::size_t classes, std::size_t bands);

SynthScene generate_scene(const SynthConfig& cfg);

}  // namespace landcover

#include "landcover/synth.hpp"

#include <algorithm>
#include <cmath>

#include "landcover/error.hpp"
#include "landcover/rng.hpp"

namespace landcover {

void SynthConfig::validate() const {
  if (width < 1 || height < 1 || bands < 1) throw ConfigError("scene dimensions must be positive");
  if (classes < 1) throw ConfigError("need at least one class");
  if (block < 1) throw ConfigError("block size must be positive");
  if (!(spread >= 0.0)) throw ConfigError("spread must be non-negative");
  if (!means.empty()) {
    if (means.size() != classes) throw ConfigError("means must list one vector per class");
    for (const auto& m : means) {
      if (m.size() != bands) throw ConfigError("each class mean needs one value per band");
    }
  }
  const std::size_t nbx = (width + block - 1) / block;
  const std::size_t nby = (height + block - 1) / block;
  if (grid_layout) {
    if (nbx * nby < classes) throw ConfigError("too few blocks for the class count");
  } else if (nby < classes) {
    throw ConfigError("too few block rows for the class count; shrink the block size");
  }
}

std::vector<std::vector<double>> default_class_means(std::size_t classes, std::size_t bands) {
  // Evenly spaced class centers over the 8-bit range, with a small per-band
  // tilt so the bands are not identical.
  const double lo = 10.0, hi = 245.0;
  std::vector<std::vector<double>> means(classes, std::vector<double>(bands));
  for (std::size_t c = 0; c < classes; ++c) {
    const double center = lo + (static_cast<double>(c) + 0.5) * (hi - lo) /
                                   static_cast<double>(classes);
    for (std::size_t b = 0; b < bands; ++b) {
      means[c][b] = center + (static_cast<double>(b) - (static_cast<double>(bands) - 1.0) / 2.0) * 4.0;
    }
  }
  return means;
}

SynthScene generate_scene(const SynthConfig& cfg) {
  cfg.validate();
  const auto means = cfg.means.empty() ? default_class_means(cfg.classes, cfg.bands) : cfg.means;
  const std::size_t nbx = (cfg.width + cfg.block - 1) / cfg.block;

  SynthScene scene;
  scene.truth.width = cfg.width;
  scene.truth.height = cfg.height;
  scene.truth.legend = default_legend(cfg.classes);
  scene.truth.labels.resize(cfg.width * cfg.height);

  auto block_class = [&](std::size_t bx, std::size_t by) -> std::size_t {
    if (cfg.grid_layout) return (by * nbx + bx) % cfg.classes;
    return by % cfg.classes;
  };

  scene.raster.width = cfg.width;
  scene.raster.height = cfg.height;
  scene.raster.bands = cfg.bands;
  scene.raster.dtype = Dtype::U8;
  scene.raster.samples.resize(cfg.width * cfg.height * cfg.bands);

  std::mt19937_64 g(cfg.seed);
  for (std::size_t y = 0; y < cfg.height; ++y) {
    for (std::size_t x = 0; x < cfg.width; ++x) {
      const std::size_t c = block_class(x / cfg.block, y / cfg.block);
      scene.truth.at(x, y) = static_cast<std::uint16_t>(c);
      for (std::size_t b = 0; b < cfg.bands; ++b) {
        const double v = uniform_in(g, means[c][b] - cfg.spread, means[c][b] + cfg.spread);
        scene.raster.at(x, y, b) = std::clamp(std::round(v), 0.0, 255.0);
      }
    }
  }

  // One signature rectangle per class, inset inside the first block that
  // carries the class so rectangles of different classes never touch.
  const std::size_t inset = cfg.block >= 8 ? cfg.block / 4 : 0;
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    SignatureClass cls;
    cls.name = scene.truth.legend[c].name;
    cls.color = scene.truth.legend[c].color;
    bool placed = false;
    for (std::size_t by = 0; !placed && by * cfg.block < cfg.height; ++by) {
      for (std::size_t bx = 0; !placed && bx * cfg.block < cfg.width; ++bx) {
        if (block_class(bx, by) != c) continue;
        const std::size_t x0 = bx * cfg.block;
        const std::size_t y0 = by * cfg.block;
        const std::size_t bw = std::min(cfg.block, cfg.width - x0);
        const std::size_t bh = std::min(cfg.block, cfg.height - y0);
        if (bw <= 2 * inset || bh <= 2 * inset) continue;
        cls.regions.push_back({x0 + inset, y0 + inset, bw - 2 * inset, bh - 2 * inset});
        placed = true;
      }
    }
    if (!placed) throw ConfigError("could not place a signature region for every class");
    scene.signatures.classes.push_back(std::move(cls));
  }

  scene.raster.validate();
  scene.truth.validate();
  return scene;
}

}  // namespace landcover

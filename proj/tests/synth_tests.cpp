#include <doctest.h>

#include <cmath>
#include <set>

#include "landcover/error.hpp"
#include "landcover/eval.hpp"
#include "landcover/synth.hpp"
#include "test_util.hpp"

using namespace landcover;

TEST_SUITE("synth") {

TEST_CASE("zero spread pins every pixel to its class mean") {
  SynthConfig cfg;
  cfg.width = 32;
  cfg.height = 32;
  cfg.bands = 2;
  cfg.classes = 4;
  cfg.block = 8;
  cfg.spread = 0.0;
  const auto scene = generate_scene(cfg);
  const auto means = default_class_means(4, 2);
  for (std::size_t y = 0; y < 32; ++y) {
    for (std::size_t x = 0; x < 32; ++x) {
      const auto cls = scene.truth.at(x, y);
      for (std::size_t b = 0; b < 2; ++b) {
        CHECK(scene.raster.at(x, y, b) == std::round(means[cls][b]));
      }
    }
  }
}

TEST_CASE("identical seeds generate identical scenes") {
  SynthConfig cfg;
  cfg.width = 24;
  cfg.height = 24;
  cfg.block = 8;
  cfg.classes = 3;
  cfg.seed = 12345;
  const auto a = generate_scene(cfg);
  const auto b = generate_scene(cfg);
  CHECK(a.raster.samples == b.raster.samples);
  CHECK(a.truth.labels == b.truth.labels);
  REQUIRE(a.signatures.classes.size() == b.signatures.classes.size());
  for (std::size_t c = 0; c < a.signatures.classes.size(); ++c) {
    const auto& ra = a.signatures.classes[c].regions;
    const auto& rb = b.signatures.classes[c].regions;
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
      CHECK(ra[i].x == rb[i].x);
      CHECK(ra[i].y == rb[i].y);
      CHECK(ra[i].width == rb[i].width);
      CHECK(ra[i].height == rb[i].height);
    }
  }

  cfg.seed = 54321;
  const auto c = generate_scene(cfg);
  CHECK(a.raster.samples != c.raster.samples);
}

TEST_CASE("truth histogram equals the block-area class counts") {
  SynthConfig cfg;
  cfg.width = 40;
  cfg.height = 40;
  cfg.block = 8;
  cfg.classes = 5;
  const auto scene = generate_scene(cfg);
  const auto hist = class_histogram(scene.truth);

  // Stripes layout: block row r is class r mod 5; 5 block rows of 8x40 pixels.
  std::vector<std::uint64_t> expected(6, 0);
  for (std::size_t by = 0; by < 5; ++by) expected[by % 5] += 8 * 40;
  CHECK(hist == expected);
}

TEST_CASE("grid layout cycles classes over blocks in scan order") {
  SynthConfig cfg;
  cfg.width = 24;
  cfg.height = 16;
  cfg.block = 8;
  cfg.classes = 5;
  cfg.grid_layout = true;
  const auto scene = generate_scene(cfg);
  // 3x2 blocks; scan order classes 0,1,2,3,4,0.
  CHECK(scene.truth.at(0, 0) == 0);
  CHECK(scene.truth.at(8, 0) == 1);
  CHECK(scene.truth.at(16, 0) == 2);
  CHECK(scene.truth.at(0, 8) == 3);
  CHECK(scene.truth.at(8, 8) == 4);
  CHECK(scene.truth.at(16, 8) == 0);
}

TEST_CASE("signature regions are in bounds, class-pure, and cover every class") {
  SynthConfig cfg;
  cfg.width = 64;
  cfg.height = 64;
  cfg.block = 16;
  cfg.classes = 4;
  const auto scene = generate_scene(cfg);
  REQUIRE(scene.signatures.classes.size() == 4);
  validate_signatures(scene.signatures, 64, 64);
  for (std::size_t c = 0; c < 4; ++c) {
    const auto& cls = scene.signatures.classes[c];
    REQUIRE(!cls.regions.empty());
    for (const auto& reg : cls.regions) {
      CHECK(reg.width > 0);
      CHECK(reg.x + reg.width <= 64);
      CHECK(reg.y + reg.height <= 64);
      for (std::size_t y = reg.y; y < reg.y + reg.height; ++y) {
        for (std::size_t x = reg.x; x < reg.x + reg.width; ++x) {
          CHECK(scene.truth.at(x, y) == c);
        }
      }
    }
  }
}

TEST_CASE("default class means are well separated in every band") {
  for (std::size_t classes : {2u, 5u, 8u}) {
    const auto means = default_class_means(classes, 3);
    REQUIRE(means.size() == classes);
    for (std::size_t c = 0; c + 1 < classes; ++c) {
      for (std::size_t b = 0; b < 3; ++b) {
        CHECK(std::abs(means[c + 1][b] - means[c][b]) >= 12.0);
        CHECK(means[c][b] >= 0.0);
        CHECK(means[c][b] <= 255.0);
      }
    }
  }
}

TEST_CASE("samples stay within spread of the class mean and inside u8 range") {
  SynthConfig cfg;
  cfg.width = 32;
  cfg.height = 32;
  cfg.block = 8;
  cfg.classes = 4;
  cfg.spread = 3.0;
  cfg.seed = 9;
  const auto scene = generate_scene(cfg);
  const auto means = default_class_means(4, cfg.bands);
  for (std::size_t y = 0; y < 32; ++y) {
    for (std::size_t x = 0; x < 32; ++x) {
      const auto cls = scene.truth.at(x, y);
      for (std::size_t b = 0; b < cfg.bands; ++b) {
        const double v = scene.raster.at(x, y, b);
        CHECK(v >= 0.0);
        CHECK(v <= 255.0);
        CHECK(std::abs(v - means[cls][b]) <= cfg.spread + 0.5);
      }
    }
  }
}

TEST_CASE("impossible configurations are rejected") {
  SynthConfig cfg;
  cfg.width = 16;
  cfg.height = 16;
  cfg.block = 16;
  cfg.classes = 5;  // one block row cannot host five stripe classes
  CHECK_THROWS_AS(generate_scene(cfg), ConfigError);

  SynthConfig bad_means;
  bad_means.means = {{1.0, 2.0}};  // wrong shape for 5 classes x 3 bands
  CHECK_THROWS_AS(generate_scene(bad_means), ConfigError);

  SynthConfig zero;
  zero.classes = 0;
  CHECK_THROWS_AS(generate_scene(zero), ConfigError);
}

TEST_CASE("custom means drive the generated values") {
  SynthConfig cfg;
  cfg.width = 16;
  cfg.height = 16;
  cfg.block = 8;
  cfg.bands = 1;
  cfg.classes = 2;
  cfg.spread = 0.0;
  cfg.means = {{40.0}, {210.0}};
  const auto scene = generate_scene(cfg);
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 0; x < 16; ++x) {
      CHECK(scene.raster.at(x, y, 0) == (scene.truth.at(x, y) == 0 ? 40.0 : 210.0));
    }
  }
}

}  // TEST_SUITE

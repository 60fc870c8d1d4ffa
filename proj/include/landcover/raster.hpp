#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace landcover {

enum class Dtype { U8, U16, F64 };

std::string dtype_name(Dtype d);
Dtype parse_dtype(const std::string& name);
std::size_t dtype_size(Dtype d);

// Multi-band image. Samples are held as doubles in band-sequential order
// (band-major, then row-major); integer dtypes are range-checked on save.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t bands = 0;
  Dtype dtype = Dtype::F64;
  std::vector<double> samples;

  std::size_t pixel_count() const { return width * height; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t b) const {
    return b * width * height + y * width + x;
  }
  double at(std::size_t x, std::size_t y, std::size_t b) const {
    return samples[index(x, y, b)];
  }
  double& at(std::size_t x, std::size_t y, std::size_t b) {
    return samples[index(x, y, b)];
  }
  // One pixel's band values as a vector.
  std::vector<double> pixel(std::size_t x, std::size_t y) const;

  void validate() const;  // throws DataError on any invariant violation
};

struct LegendEntry {
  std::string name;
  std::array<std::uint8_t, 3> color{};
};

using Legend = std::vector<LegendEntry>;

// n pairwise-distinct display colors with generic class names. The first 16
// come from a fixed high-contrast table; later ones are generated
// deterministically. Black is reserved for UNKNOWN pixels.
Legend default_legend(std::size_t n);

// Class-index image. Valid labels are 0..legend.size()-1; the value
// legend.size() is the UNKNOWN sentinel.
struct LabelMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> labels;
  Legend legend;

  std::uint16_t unknown_value() const {
    return static_cast<std::uint16_t>(legend.size());
  }
  std::uint16_t at(std::size_t x, std::size_t y) const {
    return labels[y * width + x];
  }
  std::uint16_t& at(std::size_t x, std::size_t y) {
    return labels[y * width + x];
  }

  void validate() const;
};

// A raster on disk is a key/value header plus a raw little-endian
// band-sequential data file. The data file sits next to the header with the
// extension replaced by ".bsq"; label maps add a ".legend" sidecar.
std::string data_path_for(const std::string& header_path);
std::string legend_path_for(const std::string& header_path);

std::string encode_raster_header(const Raster& r);
std::string encode_raster_data(const Raster& r);

Raster load_raster(const std::string& header_path);
void save_raster(const Raster& r, const std::string& header_path);

std::string encode_legend(const Legend& legend);
Legend parse_legend(const std::string& text);

// Label maps are stored as a single-band u16 raster plus the legend sidecar.
LabelMap load_label_map(const std::string& header_path);
void save_label_map(const LabelMap& lm, const std::string& header_path);

// Per-band order-statistic filter with replicate-edge padding. window must
// be odd and no larger than either image dimension; window 1 is the identity.
Raster median_filter(const Raster& r, std::size_t window);

// Per-band (min, max) recorded by normalize_bands, replayed at
// classification time.
using NormParams = std::vector<std::pair<double, double>>;

double apply_norm(double x, const std::pair<double, double>& mm);
Raster apply_norm_params(const Raster& r, const NormParams& params);

// Maps each band to [0,1] by min-max scaling; a constant band maps to all
// zeros. The returned parameters replay the exact transform.
std::pair<Raster, NormParams> normalize_bands(const Raster& r);

// Binary P6 pixmap: "P6\n<w> <h>\n255\n" + width*height RGB triples,
// row-major. UNKNOWN pixels paint black.
std::string encode_ppm(const LabelMap& lm);
void render_thematic(const LabelMap& lm, const std::string& out_path);

// Inverts encode_ppm given the legend the map was rendered with. The legend
// must not contain black (that is the UNKNOWN color).
LabelMap decode_ppm(const std::vector<unsigned char>& bytes, const Legend& legend);

}  // namespace landcover

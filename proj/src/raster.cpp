#include "landcover/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <map>
#include <sstream>

#include "landcover/error.hpp"
#include "landcover/textio.hpp"

namespace landcover {

std::string dtype_name(Dtype d) {
  switch (d) {
    case Dtype::U8: return "u8";
    case Dtype::U16: return "u16";
    case Dtype::F64: return "f64";
  }
  throw ConfigError("bad dtype enum");
}

Dtype parse_dtype(const std::string& name) {
  if (name == "u8") return Dtype::U8;
  if (name == "u16") return Dtype::U16;
  if (name == "f64") return Dtype::F64;
  throw DataError("unsupported dtype: '" + name + "'");
}

std::size_t dtype_size(Dtype d) {
  switch (d) {
    case Dtype::U8: return 1;
    case Dtype::U16: return 2;
    case Dtype::F64: return 8;
  }
  throw ConfigError("bad dtype enum");
}

std::vector<double> Raster::pixel(std::size_t x, std::size_t y) const {
  std::vector<double> out(bands);
  for (std::size_t b = 0; b < bands; ++b) out[b] = at(x, y, b);
  return out;
}

void Raster::validate() const {
  if (width < 1 || height < 1 || bands < 1) {
    throw DataError("raster dimensions must all be at least 1");
  }
  if (samples.size() != width * height * bands) {
    throw DataError("raster sample count does not match width*height*bands");
  }
  for (double s : samples) {
    if (!std::isfinite(s)) throw DataError("raster contains a non-finite sample");
  }
}

// Integer dtypes additionally require integral in-range samples.
static void check_dtype_representable(const Raster& r) {
  if (r.dtype == Dtype::F64) return;
  const double hi = r.dtype == Dtype::U8 ? 255.0 : 65535.0;
  for (double s : r.samples) {
    if (s < 0.0 || s > hi || s != std::floor(s)) {
      throw DataError("sample " + format_double(s) + " not representable as " +
                      dtype_name(r.dtype));
    }
  }
}

std::string data_path_for(const std::string& header_path) {
  std::filesystem::path p(header_path);
  p.replace_extension(".bsq");
  return p.string();
}

std::string legend_path_for(const std::string& header_path) {
  std::filesystem::path p(header_path);
  p.replace_extension(".legend");
  return p.string();
}

std::string encode_raster_header(const Raster& r) {
  std::ostringstream ss;
  ss << "width " << r.width << "\n";
  ss << "height " << r.height << "\n";
  ss << "bands " << r.bands << "\n";
  ss << "dtype " << dtype_name(r.dtype) << "\n";
  return ss.str();
}

std::string encode_raster_data(const Raster& r) {
  std::string out;
  out.reserve(r.samples.size() * dtype_size(r.dtype));
  for (double s : r.samples) {
    switch (r.dtype) {
      case Dtype::U8:
        out.push_back(static_cast<char>(static_cast<std::uint8_t>(s)));
        break;
      case Dtype::U16: {
        auto v = static_cast<std::uint16_t>(s);
        out.push_back(static_cast<char>(v & 0xff));
        out.push_back(static_cast<char>(v >> 8));
        break;
      }
      case Dtype::F64: {
        auto bits = std::bit_cast<std::uint64_t>(s);
        for (int byte = 0; byte < 8; ++byte) {
          out.push_back(static_cast<char>((bits >> (8 * byte)) & 0xff));
        }
        break;
      }
    }
  }
  return out;
}

Raster load_raster(const std::string& header_path) {
  Raster r;
  bool have_w = false, have_h = false, have_b = false, have_d = false;
  for (const auto& rec : read_records(header_path)) {
    if (rec.values.size() != 1) {
      throw DataError("malformed header line '" + rec.key + "' in " + header_path);
    }
    if (rec.key == "width") {
      r.width = parse_uint(rec.values[0]);
      have_w = true;
    } else if (rec.key == "height") {
      r.height = parse_uint(rec.values[0]);
      have_h = true;
    } else if (rec.key == "bands") {
      r.bands = parse_uint(rec.values[0]);
      have_b = true;
    } else if (rec.key == "dtype") {
      r.dtype = parse_dtype(rec.values[0]);
      have_d = true;
    } else {
      throw DataError("unknown header key '" + rec.key + "' in " + header_path);
    }
  }
  if (!(have_w && have_h && have_b && have_d)) {
    throw DataError("header missing width/height/bands/dtype: " + header_path);
  }
  if (r.width < 1 || r.height < 1 || r.bands < 1) {
    throw DataError("header declares an empty raster: " + header_path);
  }

  const auto bytes = read_file_bytes(data_path_for(header_path));
  const std::size_t count = r.width * r.height * r.bands;
  if (bytes.size() != count * dtype_size(r.dtype)) {
    throw DataError("data file size " + std::to_string(bytes.size()) + " does not match " +
                    std::to_string(count * dtype_size(r.dtype)) + " expected bytes: " +
                    data_path_for(header_path));
  }

  r.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    switch (r.dtype) {
      case Dtype::U8:
        r.samples[i] = bytes[i];
        break;
      case Dtype::U16:
        r.samples[i] = bytes[2 * i] | (static_cast<std::uint16_t>(bytes[2 * i + 1]) << 8);
        break;
      case Dtype::F64: {
        std::uint64_t bits = 0;
        for (int byte = 0; byte < 8; ++byte) {
          bits |= static_cast<std::uint64_t>(bytes[8 * i + byte]) << (8 * byte);
        }
        r.samples[i] = std::bit_cast<double>(bits);
        break;
      }
    }
  }
  r.validate();
  return r;
}

void save_raster(const Raster& r, const std::string& header_path) {
  r.validate();
  check_dtype_representable(r);
  const auto header = encode_raster_header(r);
  const auto data = encode_raster_data(r);
  write_file_bytes(header_path, header.data(), header.size());
  write_file_bytes(data_path_for(header_path), data.data(), data.size());
}

namespace {

// High-contrast 8-bit palette; none of these is black.
constexpr std::array<std::array<std::uint8_t, 3>, 16> kBasePalette{{
    {0xe6, 0x19, 0x4b}, {0x3c, 0xb4, 0x4b}, {0xff, 0xe1, 0x19}, {0x43, 0x63, 0xd8},
    {0xf5, 0x82, 0x31}, {0x91, 0x1e, 0xb4}, {0x46, 0xf0, 0xf0}, {0xf0, 0x32, 0xe6},
    {0xbc, 0xf6, 0x0c}, {0xfa, 0xbe, 0xbe}, {0x00, 0x80, 0x80}, {0xe6, 0xbe, 0xff},
    {0x9a, 0x63, 0x24}, {0xff, 0xfa, 0xc8}, {0x80, 0x00, 0x00}, {0xaa, 0xff, 0xc3},
}};

std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  return {static_cast<std::uint8_t>(std::lround((r + m) * 255.0)),
          static_cast<std::uint8_t>(std::lround((g + m) * 255.0)),
          static_cast<std::uint8_t>(std::lround((b + m) * 255.0))};
}

}  // namespace

Legend default_legend(std::size_t n) {
  Legend legend;
  legend.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::uint8_t, 3> color{};
    if (i < kBasePalette.size()) {
      color = kBasePalette[i];
    } else {
      // Golden-angle hue walk; nudge the value channel on a collision.
      double value = 0.95;
      color = hsv_to_rgb(std::fmod(static_cast<double>(i) * 137.508, 360.0), 0.8, value);
      auto taken = [&legend](const std::array<std::uint8_t, 3>& c) {
        for (const auto& e : legend) {
          if (e.color == c) return true;
        }
        return c == std::array<std::uint8_t, 3>{0, 0, 0};
      };
      while (taken(color)) {
        value -= 1.0 / 255.0;
        if (value <= 0.0) throw ConfigError("palette exhausted");
        color = hsv_to_rgb(std::fmod(static_cast<double>(i) * 137.508, 360.0), 0.8, value);
      }
    }
    legend.push_back({"class" + std::to_string(i), color});
  }
  return legend;
}

void LabelMap::validate() const {
  if (width < 1 || height < 1) throw DataError("label map dimensions must be at least 1");
  if (labels.size() != width * height) {
    throw DataError("label count does not match width*height");
  }
  if (legend.empty()) throw DataError("label map has an empty legend");
  for (std::uint16_t l : labels) {
    if (l > legend.size()) {
      throw DataError("label " + std::to_string(l) + " outside legend of size " +
                      std::to_string(legend.size()));
    }
  }
  for (std::size_t a = 0; a < legend.size(); ++a) {
    for (std::size_t b = a + 1; b < legend.size(); ++b) {
      if (legend[a].color == legend[b].color) {
        throw DataError("legend colors must be pairwise distinct");
      }
    }
  }
}

std::string encode_legend(const Legend& legend) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < legend.size(); ++i) {
    ss << i << " " << legend[i].name << " " << color_to_hex(legend[i].color) << "\n";
  }
  return ss.str();
}

Legend parse_legend(const std::string& text) {
  Legend legend;
  for (const auto& rec : parse_records(text)) {
    if (rec.values.size() < 2) throw DataError("malformed legend line");
    if (parse_uint(rec.key) != legend.size()) {
      throw DataError("legend indices must be consecutive from 0");
    }
    LegendEntry e;
    // Everything between the index and the trailing color is the name.
    for (std::size_t i = 0; i + 1 < rec.values.size(); ++i) {
      if (i) e.name += ' ';
      e.name += rec.values[i];
    }
    e.color = parse_hex_color(rec.values.back());
    legend.push_back(std::move(e));
  }
  if (legend.empty()) throw DataError("legend file has no entries");
  return legend;
}

LabelMap load_label_map(const std::string& header_path) {
  const Raster r = load_raster(header_path);
  if (r.bands != 1 || r.dtype != Dtype::U16) {
    throw DataError("label map raster must be single-band u16: " + header_path);
  }
  const auto legend_bytes = read_file_bytes(legend_path_for(header_path));
  LabelMap lm;
  lm.width = r.width;
  lm.height = r.height;
  lm.legend = parse_legend(std::string(legend_bytes.begin(), legend_bytes.end()));
  lm.labels.resize(r.samples.size());
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    lm.labels[i] = static_cast<std::uint16_t>(r.samples[i]);
  }
  lm.validate();
  return lm;
}

void save_label_map(const LabelMap& lm, const std::string& header_path) {
  lm.validate();
  if (lm.legend.size() > 65535) throw DataError("legend too large for u16 labels");
  Raster r;
  r.width = lm.width;
  r.height = lm.height;
  r.bands = 1;
  r.dtype = Dtype::U16;
  r.samples.assign(lm.labels.begin(), lm.labels.end());
  save_raster(r, header_path);
  const auto legend = encode_legend(lm.legend);
  write_file_bytes(legend_path_for(header_path), legend.data(), legend.size());
}

Raster median_filter(const Raster& r, std::size_t window) {
  r.validate();
  if (window % 2 == 0) throw ConfigError("median window must be odd");
  if (window > r.width || window > r.height) {
    throw ConfigError("median window larger than the image");
  }
  if (window == 1) return r;

  Raster out = r;
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(window / 2);
  std::vector<double> neighborhood;
  neighborhood.reserve(window * window);
  for (std::size_t b = 0; b < r.bands; ++b) {
    for (std::size_t y = 0; y < r.height; ++y) {
      for (std::size_t x = 0; x < r.width; ++x) {
        neighborhood.clear();
        for (std::ptrdiff_t dy = -half; dy <= half; ++dy) {
          for (std::ptrdiff_t dx = -half; dx <= half; ++dx) {
            const auto cx = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(x) + dx, 0,
                                                       static_cast<std::ptrdiff_t>(r.width) - 1);
            const auto cy = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(y) + dy, 0,
                                                       static_cast<std::ptrdiff_t>(r.height) - 1);
            neighborhood.push_back(r.at(static_cast<std::size_t>(cx),
                                        static_cast<std::size_t>(cy), b));
          }
        }
        auto mid = neighborhood.begin() + static_cast<std::ptrdiff_t>(neighborhood.size() / 2);
        std::nth_element(neighborhood.begin(), mid, neighborhood.end());
        out.at(x, y, b) = *mid;
      }
    }
  }
  return out;
}

double apply_norm(double x, const std::pair<double, double>& mm) {
  if (mm.second == mm.first) return 0.0;
  return (x - mm.first) / (mm.second - mm.first);
}

Raster apply_norm_params(const Raster& r, const NormParams& params) {
  r.validate();
  if (params.size() != r.bands) {
    throw DataError("normalization parameter count does not match band count");
  }
  Raster out = r;
  out.dtype = Dtype::F64;
  const std::size_t plane = r.width * r.height;
  for (std::size_t b = 0; b < r.bands; ++b) {
    for (std::size_t i = 0; i < plane; ++i) {
      out.samples[b * plane + i] = apply_norm(r.samples[b * plane + i], params[b]);
    }
  }
  return out;
}

std::pair<Raster, NormParams> normalize_bands(const Raster& r) {
  r.validate();
  NormParams params(r.bands);
  const std::size_t plane = r.width * r.height;
  for (std::size_t b = 0; b < r.bands; ++b) {
    auto [lo, hi] = std::minmax_element(r.samples.begin() + static_cast<std::ptrdiff_t>(b * plane),
                                        r.samples.begin() + static_cast<std::ptrdiff_t>((b + 1) * plane));
    params[b] = {*lo, *hi};
  }
  return {apply_norm_params(r, params), params};
}

std::string encode_ppm(const LabelMap& lm) {
  lm.validate();
  std::ostringstream header;
  header << "P6\n" << lm.width << " " << lm.height << "\n255\n";
  std::string out = header.str();
  out.reserve(out.size() + 3 * lm.labels.size());
  for (std::uint16_t l : lm.labels) {
    std::array<std::uint8_t, 3> color{0, 0, 0};  // UNKNOWN paints black
    if (l < lm.legend.size()) color = lm.legend[l].color;
    out.push_back(static_cast<char>(color[0]));
    out.push_back(static_cast<char>(color[1]));
    out.push_back(static_cast<char>(color[2]));
  }
  return out;
}

void render_thematic(const LabelMap& lm, const std::string& out_path) {
  const auto bytes = encode_ppm(lm);
  write_file_bytes(out_path, bytes.data(), bytes.size());
}

LabelMap decode_ppm(const std::vector<unsigned char>& bytes, const Legend& legend) {
  std::map<std::array<std::uint8_t, 3>, std::uint16_t> by_color;
  for (std::size_t i = 0; i < legend.size(); ++i) {
    if (legend[i].color == std::array<std::uint8_t, 3>{0, 0, 0}) {
      throw DataError("legend contains black, which is reserved for UNKNOWN");
    }
    if (!by_color.emplace(legend[i].color, static_cast<std::uint16_t>(i)).second) {
      throw DataError("legend colors must be pairwise distinct");
    }
  }

  // Header: "P6", then width, height, maxval as ASCII decimals.
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
  };
  auto read_token = [&]() -> std::string {
    skip_ws();
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
    return tok;
  };
  if (read_token() != "P6") throw DataError("not a P6 pixmap");
  LabelMap lm;
  lm.width = parse_uint(read_token());
  lm.height = parse_uint(read_token());
  if (parse_uint(read_token()) != 255) throw DataError("pixmap maxval must be 255");
  ++pos;  // single whitespace byte after the header
  if (bytes.size() - pos != 3 * lm.width * lm.height) {
    throw DataError("pixmap data size does not match its dimensions");
  }

  lm.legend = legend;
  lm.labels.resize(lm.width * lm.height);
  for (std::size_t i = 0; i < lm.labels.size(); ++i) {
    std::array<std::uint8_t, 3> c{bytes[pos + 3 * i], bytes[pos + 3 * i + 1],
                                  bytes[pos + 3 * i + 2]};
    if (c == std::array<std::uint8_t, 3>{0, 0, 0}) {
      lm.labels[i] = lm.unknown_value();
      continue;
    }
    auto it = by_color.find(c);
    if (it == by_color.end()) throw DataError("pixmap color not present in the legend");
    lm.labels[i] = it->second;
  }
  lm.validate();
  return lm;
}

}  // namespace landcover

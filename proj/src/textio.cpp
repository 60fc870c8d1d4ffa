#include "landcover/textio.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "landcover/error.hpp"

namespace landcover {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("not a number: '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::uint64_t v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("not a non-negative integer: '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::vector<TextRecord> parse_records(const std::string& text) {
  std::vector<TextRecord> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    TextRecord rec;
    rec.key = toks[0];
    rec.values.assign(toks.begin() + 1, toks.end());
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<TextRecord> read_records(const std::string& path) {
  auto bytes = read_file_bytes(path);
  return parse_records(std::string(bytes.begin(), bytes.end()));
}

std::string color_to_hex(const std::array<std::uint8_t, 3>& rgb) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::array<std::uint8_t, 3> parse_hex_color(const std::string& s) {
  if (s.size() != 6) throw DataError("color must be 6 hex digits: '" + s + "'");
  std::array<std::uint8_t, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    unsigned v{};
    auto res = std::from_chars(s.data() + 2 * c, s.data() + 2 * c + 2, v, 16);
    if (res.ec != std::errc{} || res.ptr != s.data() + 2 * c + 2) {
      throw DataError("color must be 6 hex digits: '" + s + "'");
    }
    rgb[c] = static_cast<std::uint8_t>(v);
  }
  return rgb;
}

std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (f.bad()) throw DataError("read failed: " + path);
  return bytes;
}

std::string read_file_text(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_file_bytes(const std::string& path, const void* data, std::size_t size) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open file for writing: " + path);
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  f.flush();
  if (!f) throw DataError("write failed: " + path);
}

}  // namespace landcover

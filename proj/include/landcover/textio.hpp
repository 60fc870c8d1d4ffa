#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace landcover {

// Shortest decimal form that parses back to the same 64-bit value.
std::string format_double(double v);
double parse_double(const std::string& s);
std::uint64_t parse_uint(const std::string& s);

std::vector<std::string> split_ws(const std::string& line);

// One record per line: first token is the key, the rest are values.
// Blank lines and lines starting with '#' are skipped.
struct TextRecord {
  std::string key;
  std::vector<std::string> values;
};

std::vector<TextRecord> parse_records(const std::string& text);
std::vector<TextRecord> read_records(const std::string& path);

std::string color_to_hex(const std::array<std::uint8_t, 3>& rgb);
std::array<std::uint8_t, 3> parse_hex_color(const std::string& s);

std::vector<unsigned char> read_file_bytes(const std::string& path);
std::string read_file_text(const std::string& path);
void write_file_bytes(const std::string& path, const void* data, std::size_t size);
inline void write_file_bytes(const std::string& path, const std::string& bytes) {
  write_file_bytes(path, bytes.data(), bytes.size());
}

}  // namespace landcover

#include "landcover/manifest.hpp"

#include <cstdint>
#include <filesystem>
#include <sstream>

#include "landcover/error.hpp"
#include "landcover/textio.hpp"

namespace landcover {

void Manifest::add(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}

void Manifest::add(const std::string& key, const char* value) {
  entries.emplace_back(key, std::string(value));
}

void Manifest::add(const std::string& key, double value) {
  entries.emplace_back(key, format_double(value));
}

void Manifest::add(const std::string& key, std::uint64_t value) {
  entries.emplace_back(key, std::to_string(value));
}

void Manifest::add(const std::string& key, bool value) {
  entries.emplace_back(key, value ? "true" : "false");
}

std::string Manifest::encode(double elapsed_ms) const {
  std::ostringstream ss;
  ss << "command " << command << "\n";
  ss << "version " << kToolVersion << "\n";
  for (const auto& [key, value] : entries) ss << key << " " << value << "\n";
  ss << "elapsed_ms " << format_double(elapsed_ms) << "\n";
  return ss.str();
}

void OutputStager::add(const std::string& path, std::string bytes) {
  files_.emplace_back(path, std::move(bytes));
}

void OutputStager::commit() {
  std::vector<std::string> temps;
  try {
    for (const auto& [path, bytes] : files_) {
      const auto parent = std::filesystem::path(path).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      const std::string tmp = path + ".tmp";
      write_file_bytes(tmp, bytes.data(), bytes.size());
      temps.push_back(tmp);
    }
    for (const auto& [path, bytes] : files_) {
      std::filesystem::rename(path + ".tmp", path);
    }
  } catch (...) {
    for (const auto& tmp : temps) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
    }
    throw;
  }
  files_.clear();
}

}  // namespace landcover

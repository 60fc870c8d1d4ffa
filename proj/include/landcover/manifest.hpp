#pragma once

#include <string>
#include <utility>
#include <vector>

namespace landcover {

inline constexpr const char* kToolVersion = "landcover 0.1.0";

// Run record: command, every resolved config value (no silent defaults),
// input/output paths, timing, version.
struct Manifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, const char* value);
  void add(const std::string& key, double value);
  void add(const std::string& key, std::uint64_t value);
  void add(const std::string& key, bool value);

  std::string encode(double elapsed_ms) const;
};

// Collects output files in memory and writes them all at the end, so a
// failing command leaves no partial outputs behind.
class OutputStager {
 public:
  void add(const std::string& path, std::string bytes);
  // Writes every file to <path>.tmp first, then renames them into place.
  void commit();

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace landcover

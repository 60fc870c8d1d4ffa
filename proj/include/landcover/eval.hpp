#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "landcover/raster.hpp"

namespace landcover {

struct ConfusionMatrix {
  std::size_t n = 0;
  std::vector<std::uint64_t> counts;  // n x n; counts[i*n+j] = truth i predicted j
  std::vector<std::string> class_names;
  std::uint64_t excluded = 0;  // pixels UNKNOWN in either map

  std::uint64_t at(std::size_t i, std::size_t j) const { return counts[i * n + j]; }
  std::uint64_t& at(std::size_t i, std::size_t j) { return counts[i * n + j]; }
  std::uint64_t row_sum(std::size_t i) const;
  std::uint64_t col_sum(std::size_t j) const;
  std::uint64_t trace() const;
  std::uint64_t total() const;
};

// Tally over pixels known in both maps; UNKNOWN pixels are excluded and
// counted separately.
ConfusionMatrix confusion_matrix(const LabelMap& truth, const LabelMap& predicted,
                                 std::size_t n);

// Percent of class i's truth pixels predicted as some other class.
double omission_error(const ConfusionMatrix& cm, std::size_t i);

// Off-diagonal mass of class i's prediction column, as a percent of the
// class's truth total.
double commission_error(const ConfusionMatrix& cm, std::size_t i);

// Intersection-over-union of class i's truth and prediction sets, in percent.
double map_accuracy(const ConfusionMatrix& cm, std::size_t i);

// 100 * trace / total.
double overall_accuracy(const ConfusionMatrix& cm);

// Pixel counts per legend class plus a final UNKNOWN bucket; sums to
// width * height.
std::vector<std::uint64_t> class_histogram(const LabelMap& lm);

// Aligned plain-text table: per-class counts, omission, commission and map
// accuracy columns, overall accuracy footer.
std::string format_report(const ConfusionMatrix& cm);

// Machine-readable counterpart with exact rational metric values.
std::string encode_metrics(const ConfusionMatrix& cm);

}  // namespace landcover

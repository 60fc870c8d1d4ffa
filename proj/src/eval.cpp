#include "landcover/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "landcover/error.hpp"
#include "landcover/textio.hpp"

namespace landcover {

std::uint64_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < n; ++j) s += at(i, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t j) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n; ++i) s += at(i, j);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n; ++i) s += at(i, i);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ConfusionMatrix confusion_matrix(const LabelMap& truth, const LabelMap& predicted,
                                 std::size_t n) {
  truth.validate();
  predicted.validate();
  if (truth.width != predicted.width || truth.height != predicted.height) {
    throw DataError("truth and predicted maps have different dimensions");
  }
  if (n < 1) throw ConfigError("class count must be at least 1");

  ConfusionMatrix cm;
  cm.n = n;
  cm.counts.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cm.class_names.push_back(i < truth.legend.size() ? truth.legend[i].name
                                                     : "class" + std::to_string(i));
  }
  for (std::size_t p = 0; p < truth.labels.size(); ++p) {
    const std::uint16_t t = truth.labels[p];
    const std::uint16_t q = predicted.labels[p];
    if (t == truth.unknown_value() || q == predicted.unknown_value()) {
      ++cm.excluded;
      continue;
    }
    if (t >= n || q >= n) {
      throw DataError("label outside the class count during tally");
    }
    ++cm.at(t, q);
  }
  return cm;
}

double omission_error(const ConfusionMatrix& cm, std::size_t i) {
  const std::uint64_t row = cm.row_sum(i);
  if (row == 0) throw DataError("class has no ground-truth pixels");
  return 100.0 * static_cast<double>(row - cm.at(i, i)) / static_cast<double>(row);
}

double commission_error(const ConfusionMatrix& cm, std::size_t i) {
  const std::uint64_t row = cm.row_sum(i);
  if (row == 0) throw DataError("class has no ground-truth pixels");
  // Denominator is the truth row total, not the prediction column total.
  return 100.0 * static_cast<double>(cm.col_sum(i) - cm.at(i, i)) / static_cast<double>(row);
}

double map_accuracy(const ConfusionMatrix& cm, std::size_t i) {
  const std::uint64_t uni = cm.row_sum(i) + cm.col_sum(i) - cm.at(i, i);
  if (uni == 0) throw DataError("class absent from both truth and prediction");
  return 100.0 * static_cast<double>(cm.at(i, i)) / static_cast<double>(uni);
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw DataError("confusion matrix is empty");
  return 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
}

std::vector<std::uint64_t> class_histogram(const LabelMap& lm) {
  lm.validate();
  std::vector<std::uint64_t> counts(lm.legend.size() + 1, 0);
  for (std::uint16_t l : lm.labels) ++counts[l];
  return counts;
}

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v);
  return buf;
}

}  // namespace

std::string format_report(const ConfusionMatrix& cm) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"Ground Classes"};
  for (const auto& name : cm.class_names) head.push_back(name);
  head.insert(head.end(), {"Omissions", "Commissions", "Map Accuracy"});
  rows.push_back(head);

  for (std::size_t i = 0; i < cm.n; ++i) {
    std::vector<std::string> row{cm.class_names[i]};
    for (std::size_t j = 0; j < cm.n; ++j) row.push_back(std::to_string(cm.at(i, j)));
    if (cm.row_sum(i) > 0) {
      row.push_back(percent(omission_error(cm, i)));
      row.push_back(percent(commission_error(cm, i)));
      row.push_back(percent(map_accuracy(cm, i)));
    } else {
      row.insert(row.end(), {"n/a", "n/a", "n/a"});
    }
    rows.push_back(row);
  }

  std::vector<std::size_t> widths(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream ss;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      ss << (c ? "  " : "");
      ss << row[c] << std::string(widths[c] - row[c].size(), ' ');
    }
    ss << "\n";
  }
  ss << "\n";
  ss << "Overall accuracy: " << percent(overall_accuracy(cm)) << " (" << cm.trace() << "/"
     << cm.total() << ")\n";
  if (cm.excluded > 0) {
    ss << "Pixels excluded as UNKNOWN: " << cm.excluded << "\n";
  }
  return ss.str();
}

std::string encode_metrics(const ConfusionMatrix& cm) {
  std::ostringstream ss;
  ss << "classes " << cm.n << "\n";
  for (std::size_t i = 0; i < cm.n; ++i) {
    ss << "name " << i << " " << cm.class_names[i] << "\n";
  }
  for (std::size_t i = 0; i < cm.n; ++i) {
    ss << "row " << i;
    for (std::size_t j = 0; j < cm.n; ++j) ss << " " << cm.at(i, j);
    ss << "\n";
  }
  ss << "excluded " << cm.excluded << "\n";
  // Exact rationals: numerator/denominator of the percentage value times 100.
  for (std::size_t i = 0; i < cm.n; ++i) {
    const auto row = cm.row_sum(i);
    if (row == 0) continue;
    const auto col = cm.col_sum(i);
    const auto diag = cm.at(i, i);
    ss << "omission " << i << " " << 100 * (row - diag) << "/" << row << "\n";
    ss << "commission " << i << " " << 100 * (col - diag) << "/" << row << "\n";
    ss << "map_accuracy " << i << " " << 100 * diag << "/" << (row + col - diag) << "\n";
  }
  ss << "overall " << 100 * cm.trace() << "/" << cm.total() << "\n";
  return ss.str();
}

}  // namespace landcover

#include "landcover/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "landcover/error.hpp"
#include "landcover/textio.hpp"

namespace landcover {

void KmeansConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be non-negative");
  if (median_window != 0 && median_window % 2 == 0) {
    throw ConfigError("median window must be odd (or 0 to disable)");
  }
}

std::vector<double> compute_row_means(const Raster& r) {
  r.validate();
  std::vector<double> out(r.height);
  for (std::size_t y = 0; y < r.height; ++y) {
    double sum = 0.0;
    for (std::size_t x = 0; x < r.width; ++x) {
      double bands_sum = 0.0;
      for (std::size_t b = 0; b < r.bands; ++b) bands_sum += r.at(x, y, b);
      sum += bands_sum / static_cast<double>(r.bands);
    }
    out[y] = sum / static_cast<double>(r.width);
  }
  return out;
}

InitialMeans derive_initial_means(const std::vector<double>& row_means, std::size_t k) {
  if (row_means.empty()) throw ConfigError("row means must be non-empty");
  if (k < 1) throw ConfigError("k must be at least 1");
  const auto [lo_it, hi_it] = std::minmax_element(row_means.begin(), row_means.end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo == hi && k > 1) {
    throw ConfigError("row means have zero spread; reduce k to 1");
  }
  InitialMeans init;
  init.range = (hi - lo) / static_cast<double>(k);
  init.means.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    init.means[j] = lo + (static_cast<double>(j) + 0.5) * init.range;
  }
  return init;
}

double euclidean_distance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DataError("vector length mismatch in distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<double> class_stddev(const std::vector<std::vector<double>>& members,
                                 const std::vector<double>& mean) {
  if (members.empty()) throw DataError("class has no members");
  std::vector<double> out(mean.size(), 0.0);
  for (const auto& x : members) {
    if (x.size() != mean.size()) throw DataError("vector length mismatch in stddev");
    for (std::size_t b = 0; b < mean.size(); ++b) {
      const double d = x[b] - mean[b];
      out[b] += d * d;
    }
  }
  for (double& v : out) v = std::sqrt(v / static_cast<double>(members.size()));
  return out;
}

namespace {

// Squared Euclidean distance from the pixel at (x, y) to a mean; the argmin
// matches the true distance and avoids the square root.
double pixel_sqdist(const Raster& r, std::size_t x, std::size_t y,
                    const std::vector<double>& mean) {
  double sum = 0.0;
  for (std::size_t b = 0; b < r.bands; ++b) {
    const double d = r.at(x, y, b) - mean[b];
    sum += d * d;
  }
  return sum;
}

// Neumaier-compensated sum keeps the objective trace stable enough that its
// monotone decrease survives rounding.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double clustering_objective(const Raster& r, const LabelMap& lm,
                            const std::vector<std::vector<double>>& means) {
  CompensatedSum obj;
  for (std::size_t y = 0; y < r.height; ++y) {
    for (std::size_t x = 0; x < r.width; ++x) {
      obj.add(pixel_sqdist(r, x, y, means[lm.at(x, y)]));
    }
  }
  return obj.value();
}

}  // namespace

LabelMap assign_pixels(const Raster& r, const std::vector<std::vector<double>>& means) {
  r.validate();
  if (means.empty()) throw ConfigError("need at least one mean");
  for (const auto& m : means) {
    if (m.size() != r.bands) throw DataError("mean length does not match band count");
  }
  LabelMap lm;
  lm.width = r.width;
  lm.height = r.height;
  lm.legend = default_legend(means.size());
  lm.labels.resize(r.pixel_count());
  for (std::size_t y = 0; y < r.height; ++y) {
    for (std::size_t x = 0; x < r.width; ++x) {
      std::size_t best = 0;
      double best_d = pixel_sqdist(r, x, y, means[0]);
      for (std::size_t j = 1; j < means.size(); ++j) {
        const double d = pixel_sqdist(r, x, y, means[j]);
        if (d < best_d) {  // ties keep the lowest class index
          best_d = d;
          best = j;
        }
      }
      lm.at(x, y) = static_cast<std::uint16_t>(best);
    }
  }
  return lm;
}

std::vector<std::vector<double>> update_means(const Raster& r, const LabelMap& lm,
                                              const std::vector<std::vector<double>>& previous) {
  r.validate();
  if (lm.width != r.width || lm.height != r.height) {
    throw DataError("label map dimensions do not match the raster");
  }
  const std::size_t k = previous.size();
  std::vector<std::vector<double>> sums(k, std::vector<double>(r.bands, 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t y = 0; y < r.height; ++y) {
    for (std::size_t x = 0; x < r.width; ++x) {
      const std::uint16_t c = lm.at(x, y);
      if (c >= k) throw DataError("label outside the class range");
      ++counts[c];
      for (std::size_t b = 0; b < r.bands; ++b) sums[c][b] += r.at(x, y, b);
    }
  }
  std::vector<std::vector<double>> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      out[c] = previous[c];  // empty class keeps its previous mean
      continue;
    }
    out[c].resize(r.bands);
    for (std::size_t b = 0; b < r.bands; ++b) {
      out[c][b] = sums[c][b] / static_cast<double>(counts[c]);
    }
  }
  return out;
}

std::pair<ClusterModel, LabelMap> cluster(const Raster& r, const KmeansConfig& cfg) {
  cfg.validate();
  r.validate();

  const InitialMeans init = derive_initial_means(compute_row_means(r), cfg.k);
  std::vector<std::vector<double>> means(cfg.k);
  for (std::size_t j = 0; j < cfg.k; ++j) {
    means[j].assign(r.bands, init.means[j]);
  }

  ClusterModel model;
  model.k = cfg.k;
  model.bands = r.bands;
  model.range = init.range;

  LabelMap lm = assign_pixels(r, means);
  model.objective_trace.push_back(clustering_objective(r, lm, means));

  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    const auto candidate = update_means(r, lm, means);
    double shift = 0.0;
    for (std::size_t c = 0; c < cfg.k; ++c) {
      for (std::size_t b = 0; b < r.bands; ++b) {
        shift = std::max(shift, std::fabs(candidate[c][b] - means[c][b]));
      }
    }
    model.iterations_run = it;
    if (shift <= cfg.tolerance) {
      // Converged: the current labels are already the nearest-mean
      // assignment for the current means, so drop the candidate.
      break;
    }
    means = candidate;
    lm = assign_pixels(r, means);
    model.objective_trace.push_back(clustering_objective(r, lm, means));
  }

  model.means = means;

  // Per-class stddev about the final means, zero for empty classes.
  std::vector<std::vector<std::vector<double>>> members(cfg.k);
  for (std::size_t y = 0; y < r.height; ++y) {
    for (std::size_t x = 0; x < r.width; ++x) {
      members[lm.at(x, y)].push_back(r.pixel(x, y));
    }
  }
  model.stddevs.assign(cfg.k, std::vector<double>(r.bands, 0.0));
  for (std::size_t c = 0; c < cfg.k; ++c) {
    if (!members[c].empty()) model.stddevs[c] = class_stddev(members[c], means[c]);
  }
  return {std::move(model), std::move(lm)};
}

std::string encode_cluster_model(const ClusterModel& m) {
  std::ostringstream ss;
  ss << "k " << m.k << "\n";
  ss << "bands " << m.bands << "\n";
  ss << "range " << format_double(m.range) << "\n";
  ss << "iterations_run " << m.iterations_run << "\n";
  for (std::size_t c = 0; c < m.k; ++c) {
    ss << "mean " << c;
    for (double v : m.means[c]) ss << " " << format_double(v);
    ss << "\n";
    ss << "stddev " << c;
    for (double v : m.stddevs[c]) ss << " " << format_double(v);
    ss << "\n";
  }
  ss << "objective_trace";
  for (double v : m.objective_trace) ss << " " << format_double(v);
  ss << "\n";
  return ss.str();
}

ClusterModel parse_cluster_model(const std::string& text) {
  ClusterModel m;
  bool have_k = false;
  for (const auto& rec : parse_records(text)) {
    if (rec.key == "k") {
      m.k = parse_uint(rec.values.at(0));
      have_k = true;
    } else if (rec.key == "bands") {
      m.bands = parse_uint(rec.values.at(0));
    } else if (rec.key == "range") {
      m.range = parse_double(rec.values.at(0));
    } else if (rec.key == "iterations_run") {
      m.iterations_run = parse_uint(rec.values.at(0));
    } else if (rec.key == "mean" || rec.key == "stddev") {
      if (rec.values.empty()) throw DataError("malformed cluster model vector line");
      const std::size_t c = parse_uint(rec.values[0]);
      auto& dst = rec.key == "mean" ? m.means : m.stddevs;
      if (c != dst.size()) throw DataError("cluster model classes must appear in order");
      std::vector<double> vec;
      for (std::size_t i = 1; i < rec.values.size(); ++i) {
        vec.push_back(parse_double(rec.values[i]));
      }
      dst.push_back(std::move(vec));
    } else if (rec.key == "objective_trace") {
      for (const auto& v : rec.values) m.objective_trace.push_back(parse_double(v));
    } else {
      throw DataError("unknown cluster model key '" + rec.key + "'");
    }
  }
  if (!have_k || m.means.size() != m.k || m.stddevs.size() != m.k) {
    throw DataError("cluster model file is incomplete");
  }
  for (const auto& vec : m.means) {
    if (vec.size() != m.bands) throw DataError("cluster model mean length mismatch");
  }
  for (const auto& vec : m.stddevs) {
    if (vec.size() != m.bands) throw DataError("cluster model stddev length mismatch");
  }
  return m;
}

void save_cluster_model(const ClusterModel& m, const std::string& path) {
  const auto text = encode_cluster_model(m);
  write_file_bytes(path, text.data(), text.size());
}

ClusterModel load_cluster_model(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return parse_cluster_model(std::string(bytes.begin(), bytes.end()));
}

}  // namespace landcover

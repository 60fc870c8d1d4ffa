#pragma once

#include <utility>
#include <vector>

#include "landcover/raster.hpp"

namespace landcover {

struct ClusterModel {
  std::size_t k = 0;
  std::size_t bands = 0;
  double range = 0.0;  // width of the seeding intervals
  std::size_t iterations_run = 0;
  std::vector<std::vector<double>> means;    // k x bands
  std::vector<std::vector<double>> stddevs;  // k x bands, diagnostic only
  std::vector<double> objective_trace;       // per-iteration sum of squared distances
};

struct KmeansConfig {
  std::size_t k = 0;
  std::size_t max_iterations = 100;
  // Converged once no mean component moves more than this.
  double tolerance = 1e-6;
  // Preprocessing toggles, applied by the pipeline before cluster().
  std::size_t median_window = 0;  // 0 = off
  bool normalize = true;

  void validate() const;
};

// Mean of each image row over band-averaged pixel intensities.
std::vector<double> compute_row_means(const Raster& r);

struct InitialMeans {
  double range = 0.0;
  std::vector<double> means;  // k scalars at interval midpoints
};

// Equal-width intervals over the row-mean spread; one scalar seed mean per
// class at each interval midpoint. Zero spread with k > 1 is degenerate.
InitialMeans derive_initial_means(const std::vector<double>& row_means, std::size_t k);

double euclidean_distance(const std::vector<double>& x, const std::vector<double>& y);

// Per-band population standard deviation of the members about the given mean.
std::vector<double> class_stddev(const std::vector<std::vector<double>>& members,
                                 const std::vector<double>& mean);

// Nearest-mean assignment; ties break to the lowest class index.
LabelMap assign_pixels(const Raster& r, const std::vector<std::vector<double>>& means);

// Per-band member averages; a class with no members keeps its previous mean.
std::vector<std::vector<double>> update_means(const Raster& r, const LabelMap& lm,
                                              const std::vector<std::vector<double>>& previous);

// Seeds from row-mean statistics, then alternates assignment and mean
// updates until the means stop moving or max_iterations is reached. The
// returned label map is always the nearest-mean assignment under the
// returned means.
std::pair<ClusterModel, LabelMap> cluster(const Raster& r, const KmeansConfig& cfg);

std::string encode_cluster_model(const ClusterModel& m);
ClusterModel parse_cluster_model(const std::string& text);
void save_cluster_model(const ClusterModel& m, const std::string& path);
ClusterModel load_cluster_model(const std::string& path);

}  // namespace landcover

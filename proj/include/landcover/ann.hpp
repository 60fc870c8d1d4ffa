#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "landcover/raster.hpp"

namespace landcover {

// One-hidden-layer perceptron with logistic units. Biases live in row 0 of
// each weight matrix and pair with an implicit constant input of 1.
struct MlpModel {
  std::size_t inputs = 0;   // one per band
  std::size_t hidden = 0;
  std::size_t outputs = 0;  // one per class
  double tau = 0.5;         // decision threshold
  std::vector<double> w;    // (inputs+1) x hidden, row-major
  std::vector<double> v;    // (hidden+1) x outputs, row-major
  Legend legend;            // one entry per output class
  NormParams norm_params;   // replayed on raw band values before the net sees them

  // i in [0, inputs], row 0 is the bias row.
  double w_at(std::size_t i, std::size_t j) const { return w[i * hidden + j]; }
  double& w_at(std::size_t i, std::size_t j) { return w[i * hidden + j]; }
  // j in [0, hidden], row 0 is the bias row.
  double v_at(std::size_t j, std::size_t k) const { return v[j * outputs + k]; }
  double& v_at(std::size_t j, std::size_t k) { return v[j * outputs + k]; }

  void validate() const;
};

struct TrainingPair {
  std::vector<double> pattern;  // length inputs, values in [0,1]
  std::vector<double> target;   // one-hot, length outputs
};

struct SignatureRegion {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 0;
  std::size_t height = 0;
};

struct SignatureClass {
  std::string name;
  std::array<std::uint8_t, 3> color{};
  std::vector<SignatureRegion> regions;
};

// Analyst-defined training regions. Regions of different classes must not
// overlap and every class must cover at least one pixel.
struct SignatureSet {
  std::string raster_ref;
  std::vector<SignatureClass> classes;
};

struct TrainConfig {
  double eta = 0.2;
  std::size_t epochs = 500;
  std::uint64_t seed = 0;
  bool shuffle = false;  // fixed presentation order unless set

  void validate() const;
};

// All weights drawn independently and uniformly from [-0.1, 0.1] with a
// deterministic seeded generator; tau 0.5, identity norm params, default
// legend.
MlpModel init_weights(std::size_t inputs, std::size_t hidden, std::size_t outputs,
                      std::uint64_t seed);

// Overflow-safe logistic; saturates instead of raising numeric faults.
double logistic(double z);

std::vector<double> hidden_activations(const MlpModel& m, const std::vector<double>& x);
std::vector<double> output_activations(const MlpModel& m, const std::vector<double>& h);

struct Decision {
  std::vector<std::uint8_t> binary;  // b_k = 1 iff o_k >= tau
  std::size_t label = 0;             // == class count means UNKNOWN
};

// Thresholding of raw output activations: binary vector at tau, single class
// by argmax (ties to the lowest index), UNKNOWN when every output is below tau.
Decision threshold_outputs(const std::vector<double>& o, double tau);

Decision classify_pattern(const MlpModel& m, const std::vector<double>& p);

// Replays the stored normalization on each pixel and classifies it.
LabelMap classify_raster(const MlpModel& m, const Raster& r);

// delta_ok = o_k (1 - o_k) (c_k - o_k)
std::vector<double> output_deltas(const std::vector<double>& o, const std::vector<double>& c);

// delta_hj = h_j (1 - h_j) sum_k delta_ok v_jk  (bias row excluded)
std::vector<double> hidden_deltas(const MlpModel& m, const std::vector<double>& h,
                                  const std::vector<double>& deltas_o);

// v_jk += eta delta_ok h_j and w_ij += eta delta_hj p_i, with constant 1
// standing in for the bias rows' companion input.
void apply_updates(MlpModel& m, const std::vector<double>& p, const std::vector<double>& h,
                   const std::vector<double>& deltas_o, const std::vector<double>& deltas_h,
                   double eta);

void validate_signatures(const SignatureSet& sig, std::size_t width, std::size_t height);

// One pair per covered pixel, pattern normalized through norm, target one-hot
// for the region's class. Emitted in class order then row-major pixel order.
std::vector<TrainingPair> extract_training_pairs(const Raster& r, const SignatureSet& sig,
                                                 const NormParams& norm);

struct TrainResult {
  MlpModel model;
  std::vector<double> epoch_mse;  // mean 1/2 sum (c - o)^2 per epoch
};

// Online backpropagation: weights change after every pattern.
TrainResult train(MlpModel model, const std::vector<TrainingPair>& pairs,
                  const TrainConfig& cfg);

std::string encode_mlp_model(const MlpModel& m);
MlpModel parse_mlp_model(const std::string& text);
void save_mlp_model(const MlpModel& m, const std::string& path);
MlpModel load_mlp_model(const std::string& path);

std::string encode_signature_set(const SignatureSet& s);
SignatureSet parse_signature_set(const std::string& text);
void save_signature_set(const SignatureSet& s, const std::string& path);
SignatureSet load_signature_set(const std::string& path);

}  // namespace landcover

#include "landcover/ann.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "landcover/error.hpp"
#include "landcover/rng.hpp"
#include "landcover/textio.hpp"

namespace landcover {

void MlpModel::validate() const {
  if (inputs < 1 || hidden < 1 || outputs < 1) {
    throw ConfigError("layer sizes must all be at least 1");
  }
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie strictly in (0,1)");
  if (w.size() != (inputs + 1) * hidden || v.size() != (hidden + 1) * outputs) {
    throw DataError("weight matrix shapes do not match the layer sizes");
  }
  for (double x : w) {
    if (!std::isfinite(x)) throw DataError("non-finite weight");
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw DataError("non-finite weight");
  }
  if (norm_params.size() != inputs) {
    throw DataError("normalization parameter count does not match input count");
  }
  if (legend.size() != outputs) {
    throw DataError("legend size does not match output count");
  }
}

void TrainConfig::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in (0,1]");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
}

MlpModel init_weights(std::size_t inputs, std::size_t hidden, std::size_t outputs,
                      std::uint64_t seed) {
  if (inputs < 1 || hidden < 1 || outputs < 1) {
    throw ConfigError("layer sizes must all be at least 1");
  }
  MlpModel m;
  m.inputs = inputs;
  m.hidden = hidden;
  m.outputs = outputs;
  m.tau = 0.5;
  m.w.resize((inputs + 1) * hidden);
  m.v.resize((hidden + 1) * outputs);
  std::mt19937_64 g(seed);
  for (double& x : m.w) x = -0.1 + 0.2 * uniform_unit(g);
  for (double& x : m.v) x = -0.1 + 0.2 * uniform_unit(g);
  m.legend = default_legend(outputs);
  m.norm_params.assign(inputs, {0.0, 1.0});  // identity transform
  return m;
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> hidden_activations(const MlpModel& m, const std::vector<double>& x) {
  if (x.size() != m.inputs) throw DataError("pattern length does not match input count");
  std::vector<double> h(m.hidden);
  for (std::size_t j = 0; j < m.hidden; ++j) {
    double z = m.w_at(0, j);
    for (std::size_t i = 0; i < m.inputs; ++i) z += m.w_at(i + 1, j) * x[i];
    h[j] = logistic(z);
  }
  return h;
}

std::vector<double> output_activations(const MlpModel& m, const std::vector<double>& h) {
  if (h.size() != m.hidden) throw DataError("activation length does not match hidden count");
  std::vector<double> o(m.outputs);
  for (std::size_t k = 0; k < m.outputs; ++k) {
    double z = m.v_at(0, k);
    for (std::size_t j = 0; j < m.hidden; ++j) z += m.v_at(j + 1, k) * h[j];
    o[k] = logistic(z);
  }
  return o;
}

Decision threshold_outputs(const std::vector<double>& o, double tau) {
  if (o.empty()) throw DataError("no outputs to threshold");
  Decision d;
  d.binary.resize(o.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < o.size(); ++k) {
    d.binary[k] = o[k] >= tau ? 1 : 0;
    if (o[k] > o[best]) best = k;  // ties keep the lowest index
  }
  d.label = o[best] >= tau ? best : o.size();
  return d;
}

Decision classify_pattern(const MlpModel& m, const std::vector<double>& p) {
  return threshold_outputs(output_activations(m, hidden_activations(m, p)), m.tau);
}

LabelMap classify_raster(const MlpModel& m, const Raster& r) {
  m.validate();
  r.validate();
  if (r.bands != m.inputs) {
    throw DataError("raster has " + std::to_string(r.bands) + " bands but the model expects " +
                    std::to_string(m.inputs));
  }
  LabelMap lm;
  lm.width = r.width;
  lm.height = r.height;
  lm.legend = m.legend;
  lm.labels.resize(r.pixel_count());
  std::vector<double> p(m.inputs);
  for (std::size_t y = 0; y < r.height; ++y) {
    for (std::size_t x = 0; x < r.width; ++x) {
      for (std::size_t b = 0; b < m.inputs; ++b) {
        p[b] = apply_norm(r.at(x, y, b), m.norm_params[b]);
      }
      lm.at(x, y) = static_cast<std::uint16_t>(classify_pattern(m, p).label);
    }
  }
  return lm;
}

std::vector<double> output_deltas(const std::vector<double>& o, const std::vector<double>& c) {
  if (o.size() != c.size()) throw DataError("output and target lengths differ");
  std::vector<double> d(o.size());
  for (std::size_t k = 0; k < o.size(); ++k) d[k] = o[k] * (1.0 - o[k]) * (c[k] - o[k]);
  return d;
}

std::vector<double> hidden_deltas(const MlpModel& m, const std::vector<double>& h,
                                  const std::vector<double>& deltas_o) {
  if (h.size() != m.hidden || deltas_o.size() != m.outputs) {
    throw DataError("delta dimensions do not match the model");
  }
  std::vector<double> d(m.hidden);
  for (std::size_t j = 0; j < m.hidden; ++j) {
    double sum = 0.0;
    for (std::size_t k = 0; k < m.outputs; ++k) sum += deltas_o[k] * m.v_at(j + 1, k);
    d[j] = h[j] * (1.0 - h[j]) * sum;
  }
  return d;
}

void apply_updates(MlpModel& m, const std::vector<double>& p, const std::vector<double>& h,
                   const std::vector<double>& deltas_o, const std::vector<double>& deltas_h,
                   double eta) {
  if (p.size() != m.inputs || h.size() != m.hidden || deltas_o.size() != m.outputs ||
      deltas_h.size() != m.hidden) {
    throw DataError("update dimensions do not match the model");
  }
  for (std::size_t k = 0; k < m.outputs; ++k) {
    m.v_at(0, k) += eta * deltas_o[k];  // bias row, companion input 1
    for (std::size_t j = 0; j < m.hidden; ++j) {
      m.v_at(j + 1, k) += eta * deltas_o[k] * h[j];
    }
  }
  for (std::size_t j = 0; j < m.hidden; ++j) {
    m.w_at(0, j) += eta * deltas_h[j];  // bias row, companion input 1
    for (std::size_t i = 0; i < m.inputs; ++i) {
      m.w_at(i + 1, j) += eta * deltas_h[j] * p[i];
    }
  }
}

void validate_signatures(const SignatureSet& sig, std::size_t width, std::size_t height) {
  if (sig.classes.empty()) throw DataError("signature set has no classes");
  // class index + 1 per covered pixel; 0 = uncovered
  std::vector<std::uint32_t> owner(width * height, 0);
  for (std::size_t c = 0; c < sig.classes.size(); ++c) {
    std::size_t covered = 0;
    for (const auto& reg : sig.classes[c].regions) {
      if (reg.width < 1 || reg.height < 1) {
        throw DataError("signature region for class '" + sig.classes[c].name + "' is empty");
      }
      if (reg.x + reg.width > width || reg.y + reg.height > height) {
        throw DataError("signature region for class '" + sig.classes[c].name +
                        "' extends outside the raster");
      }
      for (std::size_t y = reg.y; y < reg.y + reg.height; ++y) {
        for (std::size_t x = reg.x; x < reg.x + reg.width; ++x) {
          auto& cell = owner[y * width + x];
          if (cell != 0 && cell != c + 1) {
            throw DataError("signature regions of classes '" +
                            sig.classes[cell - 1].name + "' and '" + sig.classes[c].name +
                            "' overlap");
          }
          cell = static_cast<std::uint32_t>(c + 1);
          ++covered;
        }
      }
    }
    if (covered == 0) {
      throw DataError("signature class '" + sig.classes[c].name + "' covers no pixels");
    }
  }
}

std::vector<TrainingPair> extract_training_pairs(const Raster& r, const SignatureSet& sig,
                                                 const NormParams& norm) {
  r.validate();
  if (norm.size() != r.bands) {
    throw DataError("normalization parameter count does not match band count");
  }
  validate_signatures(sig, r.width, r.height);

  const std::size_t n = sig.classes.size();
  std::vector<TrainingPair> pairs;
  std::vector<std::uint8_t> covered(r.pixel_count());
  for (std::size_t c = 0; c < n; ++c) {
    // Overlapping regions of the same class contribute each pixel once.
    std::fill(covered.begin(), covered.end(), 0);
    for (const auto& reg : sig.classes[c].regions) {
      for (std::size_t y = reg.y; y < reg.y + reg.height; ++y) {
        for (std::size_t x = reg.x; x < reg.x + reg.width; ++x) {
          covered[y * r.width + x] = 1;
        }
      }
    }
    for (std::size_t y = 0; y < r.height; ++y) {
      for (std::size_t x = 0; x < r.width; ++x) {
        if (!covered[y * r.width + x]) continue;
        TrainingPair tp;
        tp.pattern.resize(r.bands);
        for (std::size_t b = 0; b < r.bands; ++b) {
          tp.pattern[b] = apply_norm(r.at(x, y, b), norm[b]);
        }
        tp.target.assign(n, 0.0);
        tp.target[c] = 1.0;
        pairs.push_back(std::move(tp));
      }
    }
  }
  return pairs;
}

TrainResult train(MlpModel model, const std::vector<TrainingPair>& pairs,
                  const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (pairs.empty()) throw DataError("training set is empty");
  for (const auto& tp : pairs) {
    if (tp.pattern.size() != model.inputs || tp.target.size() != model.outputs) {
      throw DataError("training pair dimensions do not match the model");
    }
    double sum = 0.0;
    for (double t : tp.target) {
      if (t != 0.0 && t != 1.0) throw DataError("targets must be binary");
      sum += t;
    }
    if (sum != 1.0) throw DataError("targets must be one-hot");
    for (double x : tp.pattern) {
      if (!(x >= 0.0 && x <= 1.0)) throw DataError("pattern values must lie in [0,1]");
    }
  }

  TrainResult result;
  result.epoch_mse.reserve(cfg.epochs);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 g(cfg.seed);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffle_in_place(order, g);
    double err_sum = 0.0;
    for (std::size_t idx : order) {
      const auto& tp = pairs[idx];
      const auto h = hidden_activations(model, tp.pattern);
      const auto o = output_activations(model, h);
      double e = 0.0;
      for (std::size_t k = 0; k < o.size(); ++k) {
        const double d = tp.target[k] - o[k];
        e += d * d;
      }
      err_sum += 0.5 * e;
      const auto d_o = output_deltas(o, tp.target);
      const auto d_h = hidden_deltas(model, h, d_o);
      apply_updates(model, tp.pattern, h, d_o, d_h, cfg.eta);
    }
    result.epoch_mse.push_back(err_sum / static_cast<double>(pairs.size()));
  }
  result.model = std::move(model);
  return result;
}

std::string encode_mlp_model(const MlpModel& m) {
  std::ostringstream ss;
  ss << "inputs " << m.inputs << "\n";
  ss << "hidden " << m.hidden << "\n";
  ss << "outputs " << m.outputs << "\n";
  ss << "tau " << format_double(m.tau) << "\n";
  for (std::size_t c = 0; c < m.legend.size(); ++c) {
    ss << "class " << c << " " << m.legend[c].name << " " << color_to_hex(m.legend[c].color)
       << "\n";
  }
  for (std::size_t b = 0; b < m.norm_params.size(); ++b) {
    ss << "norm " << b << " " << format_double(m.norm_params[b].first) << " "
       << format_double(m.norm_params[b].second) << "\n";
  }
  for (std::size_t i = 0; i <= m.inputs; ++i) {
    ss << "w " << i;
    for (std::size_t j = 0; j < m.hidden; ++j) ss << " " << format_double(m.w_at(i, j));
    ss << "\n";
  }
  for (std::size_t j = 0; j <= m.hidden; ++j) {
    ss << "v " << j;
    for (std::size_t k = 0; k < m.outputs; ++k) ss << " " << format_double(m.v_at(j, k));
    ss << "\n";
  }
  return ss.str();
}

MlpModel parse_mlp_model(const std::string& text) {
  MlpModel m;
  std::vector<std::vector<double>> w_rows, v_rows;
  for (const auto& rec : parse_records(text)) {
    if (rec.key == "inputs") {
      m.inputs = parse_uint(rec.values.at(0));
    } else if (rec.key == "hidden") {
      m.hidden = parse_uint(rec.values.at(0));
    } else if (rec.key == "outputs") {
      m.outputs = parse_uint(rec.values.at(0));
    } else if (rec.key == "tau") {
      m.tau = parse_double(rec.values.at(0));
    } else if (rec.key == "class") {
      if (rec.values.size() < 3) throw DataError("malformed model class line");
      if (parse_uint(rec.values[0]) != m.legend.size()) {
        throw DataError("model classes must appear in order");
      }
      LegendEntry e;
      for (std::size_t i = 1; i + 1 < rec.values.size(); ++i) {
        if (i > 1) e.name += ' ';
        e.name += rec.values[i];
      }
      e.color = parse_hex_color(rec.values.back());
      m.legend.push_back(std::move(e));
    } else if (rec.key == "norm") {
      if (rec.values.size() != 3) throw DataError("malformed model norm line");
      if (parse_uint(rec.values[0]) != m.norm_params.size()) {
        throw DataError("model norm bands must appear in order");
      }
      m.norm_params.emplace_back(parse_double(rec.values[1]), parse_double(rec.values[2]));
    } else if (rec.key == "w" || rec.key == "v") {
      if (rec.values.empty()) throw DataError("malformed model weight line");
      auto& rows = rec.key == "w" ? w_rows : v_rows;
      if (parse_uint(rec.values[0]) != rows.size()) {
        throw DataError("model weight rows must appear in order");
      }
      std::vector<double> row;
      for (std::size_t i = 1; i < rec.values.size(); ++i) {
        row.push_back(parse_double(rec.values[i]));
      }
      rows.push_back(std::move(row));
    } else {
      throw DataError("unknown model key '" + rec.key + "'");
    }
  }
  if (w_rows.size() != m.inputs + 1 || v_rows.size() != m.hidden + 1) {
    throw DataError("model weight row counts do not match the layer sizes");
  }
  for (const auto& row : w_rows) {
    if (row.size() != m.hidden) throw DataError("model w row length mismatch");
    m.w.insert(m.w.end(), row.begin(), row.end());
  }
  for (const auto& row : v_rows) {
    if (row.size() != m.outputs) throw DataError("model v row length mismatch");
    m.v.insert(m.v.end(), row.begin(), row.end());
  }
  m.validate();
  return m;
}

void save_mlp_model(const MlpModel& m, const std::string& path) {
  m.validate();
  const auto text = encode_mlp_model(m);
  write_file_bytes(path, text.data(), text.size());
}

MlpModel load_mlp_model(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return parse_mlp_model(std::string(bytes.begin(), bytes.end()));
}

std::string encode_signature_set(const SignatureSet& s) {
  std::ostringstream ss;
  if (!s.raster_ref.empty()) ss << "raster " << s.raster_ref << "\n";
  for (const auto& cls : s.classes) {
    ss << "class " << cls.name << " " << color_to_hex(cls.color) << "\n";
    for (const auto& reg : cls.regions) {
      ss << "region " << reg.x << " " << reg.y << " " << reg.width << " " << reg.height << "\n";
    }
  }
  return ss.str();
}

SignatureSet parse_signature_set(const std::string& text) {
  SignatureSet s;
  for (const auto& rec : parse_records(text)) {
    if (rec.key == "raster") {
      if (rec.values.size() != 1) throw DataError("malformed signature raster line");
      s.raster_ref = rec.values[0];
    } else if (rec.key == "class") {
      if (rec.values.size() < 2) throw DataError("malformed signature class line");
      SignatureClass cls;
      for (std::size_t i = 0; i + 1 < rec.values.size(); ++i) {
        if (i) cls.name += ' ';
        cls.name += rec.values[i];
      }
      cls.color = parse_hex_color(rec.values.back());
      s.classes.push_back(std::move(cls));
    } else if (rec.key == "region") {
      if (s.classes.empty()) throw DataError("signature region before any class");
      if (rec.values.size() != 4) throw DataError("malformed signature region line");
      SignatureRegion reg;
      reg.x = parse_uint(rec.values[0]);
      reg.y = parse_uint(rec.values[1]);
      reg.width = parse_uint(rec.values[2]);
      reg.height = parse_uint(rec.values[3]);
      s.classes.back().regions.push_back(reg);
    } else {
      throw DataError("unknown signature key '" + rec.key + "'");
    }
  }
  if (s.classes.empty()) throw DataError("signature file has no classes");
  for (const auto& cls : s.classes) {
    if (cls.regions.empty()) {
      throw DataError("signature class '" + cls.name + "' has no regions");
    }
  }
  return s;
}

void save_signature_set(const SignatureSet& s, const std::string& path) {
  const auto text = encode_signature_set(s);
  write_file_bytes(path, text.data(), text.size());
}

SignatureSet load_signature_set(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return parse_signature_set(std::string(bytes.begin(), bytes.end()));
}

}  // namespace landcover

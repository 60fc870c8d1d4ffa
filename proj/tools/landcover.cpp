#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "landcover/ann.hpp"
#include "landcover/error.hpp"
#include "landcover/eval.hpp"
#include "landcover/kmeans.hpp"
#include "landcover/manifest.hpp"
#include "landcover/raster.hpp"
#include "landcover/rng.hpp"
#include "landcover/synth.hpp"
#include "landcover/textio.hpp"

namespace lc = landcover;

namespace {

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Median filter first (optional), then per-band min-max scaling. With
// normalization off the recorded parameters are the identity transform.
struct Prepared {
  lc::Raster filtered;    // median-filtered input; bands still in raw units
  lc::NormParams params;  // replayed wherever patterns are built
};

Prepared preprocess(const lc::Raster& r, std::size_t median_window, bool normalize) {
  Prepared p;
  p.filtered = median_window > 0 ? lc::median_filter(r, median_window) : r;
  if (normalize) {
    p.params = lc::normalize_bands(p.filtered).second;
  } else {
    p.params.assign(p.filtered.bands, {0.0, 1.0});
  }
  return p;
}

void stage_raster(lc::OutputStager& out, const lc::Raster& r, const std::string& header_path) {
  r.validate();
  out.add(header_path, lc::encode_raster_header(r));
  out.add(lc::data_path_for(header_path), lc::encode_raster_data(r));
}

void stage_label_map(lc::OutputStager& out, const lc::LabelMap& lm,
                     const std::string& header_path) {
  lm.validate();
  lc::Raster r;
  r.width = lm.width;
  r.height = lm.height;
  r.bands = 1;
  r.dtype = lc::Dtype::U16;
  r.samples.assign(lm.labels.begin(), lm.labels.end());
  stage_raster(out, r, header_path);
  out.add(lc::legend_path_for(header_path), lc::encode_legend(lm.legend));
}

std::string encode_error_trace(const std::vector<double>& mse) {
  std::ostringstream ss;
  ss << "# epoch mean_squared_error\n";
  for (std::size_t e = 0; e < mse.size(); ++e) {
    ss << e << " " << lc::format_double(mse[e]) << "\n";
  }
  return ss.str();
}

// "m1,m2,m3;m4,m5,m6" -> one mean vector per class
std::vector<std::vector<double>> parse_means_spec(const std::string& spec) {
  std::vector<std::vector<double>> out;
  std::istringstream classes(spec);
  std::string cls;
  while (std::getline(classes, cls, ';')) {
    std::vector<double> vec;
    std::istringstream values(cls);
    std::string v;
    while (std::getline(values, v, ',')) vec.push_back(lc::parse_double(v));
    out.push_back(std::move(vec));
  }
  return out;
}

struct SharedArgs {
  std::string out_dir = ".";
  std::size_t median_window = 0;
  bool normalize = true;
  std::uint64_t seed = 0;
};

struct TrainArgs {
  double eta = 0.2;
  std::size_t epochs = 500;
  std::size_t hidden = 5;
  double tau = 0.5;
  bool shuffle = false;
  std::string resume;
};

struct KmeansArgs {
  std::size_t k = 0;
  std::size_t max_iter = 100;
  double tol = 1e-6;
};

void add_out_dir(CLI::App* cmd, SharedArgs& a) {
  cmd->add_option("--out-dir", a.out_dir, "Directory for output files")
      ->capture_default_str();
}

void add_preprocess_flags(CLI::App* cmd, SharedArgs& a) {
  cmd->add_option("--median-window", a.median_window,
                  "Odd window for the noise-suppression median filter; 0 disables it")
      ->capture_default_str();
  cmd->add_flag("--normalize,!--no-normalize", a.normalize,
                "Scale each band to [0,1] before processing")
      ->capture_default_str();
}

void add_train_flags(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--eta", a.eta, "Learning rate, in (0,1]")->capture_default_str();
  cmd->add_option("--epochs", a.epochs, "Training cycles through the set")
      ->capture_default_str();
  cmd->add_option("--hidden", a.hidden, "Hidden-layer size")->capture_default_str();
  cmd->add_option("--tau", a.tau, "Decision threshold in (0,1); below it a pixel is UNKNOWN")
      ->capture_default_str();
  cmd->add_flag("--shuffle", a.shuffle, "Reshuffle the presentation order each epoch")
      ->capture_default_str();
}

void add_kmeans_flags(CLI::App* cmd, KmeansArgs& a) {
  cmd->add_option("--k", a.k, "Number of classes")->required();
  cmd->add_option("--max-iter", a.max_iter, "Iteration cap")->capture_default_str();
  cmd->add_option("--tol", a.tol, "Convergence threshold on the mean shift")
      ->capture_default_str();
}

void manifest_shared(lc::Manifest& m, const SharedArgs& a, bool with_seed) {
  m.add("out_dir", a.out_dir);
  m.add("median_window", static_cast<std::uint64_t>(a.median_window));
  m.add("normalize", a.normalize);
  if (with_seed) m.add("seed", a.seed);
}

void manifest_train(lc::Manifest& m, const TrainArgs& a) {
  m.add("eta", a.eta);
  m.add("epochs", static_cast<std::uint64_t>(a.epochs));
  m.add("hidden", static_cast<std::uint64_t>(a.hidden));
  m.add("tau", a.tau);
  m.add("shuffle", a.shuffle);
}

void manifest_kmeans(lc::Manifest& m, const KmeansArgs& a) {
  m.add("k", static_cast<std::uint64_t>(a.k));
  m.add("max_iter", static_cast<std::uint64_t>(a.max_iter));
  m.add("tol", a.tol);
}

void run_kmeans(const std::string& input, const KmeansArgs& ka, const SharedArgs& sa) {
  Timer timer;
  const auto raw = lc::load_raster(input);
  const auto prep = preprocess(raw, sa.median_window, sa.normalize);
  const auto working = lc::apply_norm_params(prep.filtered, prep.params);

  lc::KmeansConfig cfg;
  cfg.k = ka.k;
  cfg.max_iterations = ka.max_iter;
  cfg.tolerance = ka.tol;
  cfg.median_window = sa.median_window;
  cfg.normalize = sa.normalize;
  auto [model, labels] = lc::cluster(working, cfg);

  lc::OutputStager out;
  stage_label_map(out, labels, join(sa.out_dir, "labels.hdr"));
  out.add(join(sa.out_dir, "cluster_model.txt"), lc::encode_cluster_model(model));

  lc::Manifest mf;
  mf.command = "kmeans";
  mf.add("input", input);
  manifest_kmeans(mf, ka);
  manifest_shared(mf, sa, false);
  mf.add("iterations_run", static_cast<std::uint64_t>(model.iterations_run));
  mf.add("output_labels", join(sa.out_dir, "labels.hdr"));
  mf.add("output_model", join(sa.out_dir, "cluster_model.txt"));
  out.add(join(sa.out_dir, "kmeans_manifest.txt"), mf.encode(timer.ms()));
  out.commit();
}

void run_train(const std::string& input, const std::string& sig_path, const TrainArgs& ta,
               const SharedArgs& sa) {
  Timer timer;
  const auto raw = lc::load_raster(input);
  const auto sig = lc::load_signature_set(sig_path);
  const auto prep = preprocess(raw, sa.median_window, sa.normalize);
  const auto pairs = lc::extract_training_pairs(prep.filtered, sig, prep.params);

  lc::MlpModel model;
  if (ta.resume.empty()) {
    model = lc::init_weights(raw.bands, ta.hidden, sig.classes.size(), sa.seed);
  } else {
    model = lc::load_mlp_model(ta.resume);
    if (model.inputs != raw.bands) {
      throw lc::DataError("resume model expects " + std::to_string(model.inputs) +
                          " bands, raster has " + std::to_string(raw.bands));
    }
    if (model.outputs != sig.classes.size()) {
      throw lc::DataError("resume model has " + std::to_string(model.outputs) +
                          " outputs, signature set has " +
                          std::to_string(sig.classes.size()) + " classes");
    }
  }
  model.tau = ta.tau;
  model.norm_params = prep.params;
  model.legend.clear();
  for (const auto& cls : sig.classes) model.legend.push_back({cls.name, cls.color});

  lc::TrainConfig tcfg;
  tcfg.eta = ta.eta;
  tcfg.epochs = ta.epochs;
  tcfg.seed = sa.seed;
  tcfg.shuffle = ta.shuffle;
  auto result = lc::train(std::move(model), pairs, tcfg);

  lc::OutputStager out;
  out.add(join(sa.out_dir, "model.txt"), lc::encode_mlp_model(result.model));
  out.add(join(sa.out_dir, "error_trace.txt"), encode_error_trace(result.epoch_mse));

  lc::Manifest mf;
  mf.command = "train";
  mf.add("input", input);
  mf.add("signatures", sig_path);
  mf.add("resume", ta.resume.empty() ? std::string("none") : ta.resume);
  TrainArgs effective = ta;
  effective.hidden = result.model.hidden;
  manifest_train(mf, effective);
  manifest_shared(mf, sa, true);
  mf.add("training_pairs", static_cast<std::uint64_t>(pairs.size()));
  mf.add("output_model", join(sa.out_dir, "model.txt"));
  mf.add("output_error_trace", join(sa.out_dir, "error_trace.txt"));
  out.add(join(sa.out_dir, "train_manifest.txt"), mf.encode(timer.ms()));
  out.commit();
}

void run_classify(const std::string& model_path, const std::string& input,
                  const SharedArgs& sa) {
  Timer timer;
  const auto model = lc::load_mlp_model(model_path);
  const auto raw = lc::load_raster(input);
  const auto filtered = sa.median_window > 0 ? lc::median_filter(raw, sa.median_window) : raw;
  const auto labels = lc::classify_raster(model, filtered);

  lc::OutputStager out;
  stage_label_map(out, labels, join(sa.out_dir, "classified.hdr"));

  lc::Manifest mf;
  mf.command = "classify";
  mf.add("model", model_path);
  mf.add("input", input);
  mf.add("out_dir", sa.out_dir);
  mf.add("median_window", static_cast<std::uint64_t>(sa.median_window));
  mf.add("output_labels", join(sa.out_dir, "classified.hdr"));
  out.add(join(sa.out_dir, "classify_manifest.txt"), mf.encode(timer.ms()));
  out.commit();
}

void run_unsup_ann(const std::string& input, const KmeansArgs& ka, const TrainArgs& ta,
                   std::size_t samples_per_cluster, const SharedArgs& sa) {
  Timer timer;
  if (samples_per_cluster < 1) throw lc::ConfigError("samples per cluster must be positive");
  const auto raw = lc::load_raster(input);
  const auto prep = preprocess(raw, sa.median_window, sa.normalize);
  const auto working = lc::apply_norm_params(prep.filtered, prep.params);

  lc::KmeansConfig kcfg;
  kcfg.k = ka.k;
  kcfg.max_iterations = ka.max_iter;
  kcfg.tolerance = ka.tol;
  kcfg.median_window = sa.median_window;
  kcfg.normalize = sa.normalize;
  auto [cmodel, kmap] = lc::cluster(working, kcfg);

  // Cluster assignments become pseudo-labels: up to S sampled pixels per
  // cluster train a supervised perceptron on the same normalized bands.
  std::vector<std::vector<std::size_t>> by_cluster(ka.k);
  for (std::size_t i = 0; i < kmap.labels.size(); ++i) {
    by_cluster[kmap.labels[i]].push_back(i);
  }
  std::mt19937_64 g(sa.seed);
  std::vector<lc::TrainingPair> pairs;
  for (std::size_t c = 0; c < ka.k; ++c) {
    auto& idxs = by_cluster[c];
    if (idxs.size() > samples_per_cluster) {
      for (std::size_t i = 0; i < samples_per_cluster; ++i) {
        const auto j = i + lc::uniform_below(g, idxs.size() - i);
        std::swap(idxs[i], idxs[j]);
      }
      idxs.resize(samples_per_cluster);
      std::sort(idxs.begin(), idxs.end());
    }
    for (std::size_t idx : idxs) {
      lc::TrainingPair tp;
      tp.pattern.resize(working.bands);
      for (std::size_t b = 0; b < working.bands; ++b) {
        tp.pattern[b] = working.samples[b * working.pixel_count() + idx];
      }
      tp.target.assign(ka.k, 0.0);
      tp.target[c] = 1.0;
      pairs.push_back(std::move(tp));
    }
  }

  auto model = lc::init_weights(raw.bands, ta.hidden, ka.k, sa.seed);
  model.tau = ta.tau;
  model.norm_params = prep.params;
  model.legend = kmap.legend;

  lc::TrainConfig tcfg;
  tcfg.eta = ta.eta;
  tcfg.epochs = ta.epochs;
  tcfg.seed = sa.seed;
  tcfg.shuffle = ta.shuffle;
  auto result = lc::train(std::move(model), pairs, tcfg);
  const auto amap = lc::classify_raster(result.model, prep.filtered);

  lc::OutputStager out;
  stage_label_map(out, kmap, join(sa.out_dir, "kmeans_labels.hdr"));
  out.add(join(sa.out_dir, "cluster_model.txt"), lc::encode_cluster_model(cmodel));
  out.add(join(sa.out_dir, "model.txt"), lc::encode_mlp_model(result.model));
  stage_label_map(out, amap, join(sa.out_dir, "ann_labels.hdr"));

  lc::Manifest mf;
  mf.command = "unsup-ann";
  mf.add("input", input);
  manifest_kmeans(mf, ka);
  manifest_train(mf, ta);
  manifest_shared(mf, sa, true);
  mf.add("samples_per_cluster", static_cast<std::uint64_t>(samples_per_cluster));
  mf.add("training_pairs", static_cast<std::uint64_t>(pairs.size()));
  mf.add("output_kmeans_labels", join(sa.out_dir, "kmeans_labels.hdr"));
  mf.add("output_cluster_model", join(sa.out_dir, "cluster_model.txt"));
  mf.add("output_model", join(sa.out_dir, "model.txt"));
  mf.add("output_ann_labels", join(sa.out_dir, "ann_labels.hdr"));
  out.add(join(sa.out_dir, "unsup_ann_manifest.txt"), mf.encode(timer.ms()));
  out.commit();
}

void run_evaluate(const std::string& truth_path, const std::string& pred_path,
                  const SharedArgs& sa) {
  Timer timer;
  const auto truth = lc::load_label_map(truth_path);
  const auto pred = lc::load_label_map(pred_path);
  if (truth.legend.size() != pred.legend.size()) {
    throw lc::DataError("truth and predicted maps disagree on the class count");
  }
  const auto cm = lc::confusion_matrix(truth, pred, truth.legend.size());

  lc::OutputStager out;
  out.add(join(sa.out_dir, "report.txt"), lc::format_report(cm));
  out.add(join(sa.out_dir, "metrics.txt"), lc::encode_metrics(cm));

  lc::Manifest mf;
  mf.command = "evaluate";
  mf.add("truth", truth_path);
  mf.add("predicted", pred_path);
  mf.add("out_dir", sa.out_dir);
  mf.add("classes", static_cast<std::uint64_t>(cm.n));
  mf.add("excluded_unknown", cm.excluded);
  mf.add("output_report", join(sa.out_dir, "report.txt"));
  mf.add("output_metrics", join(sa.out_dir, "metrics.txt"));
  out.add(join(sa.out_dir, "evaluate_manifest.txt"), mf.encode(timer.ms()));
  out.commit();
}

void run_render(const std::string& labels_path, const std::string& out_path,
                const SharedArgs& sa) {
  Timer timer;
  const auto lm = lc::load_label_map(labels_path);

  lc::OutputStager out;
  out.add(out_path, lc::encode_ppm(lm));

  lc::Manifest mf;
  mf.command = "render";
  mf.add("input", labels_path);
  mf.add("output", out_path);
  mf.add("out_dir", sa.out_dir);
  out.add(join(sa.out_dir, "render_manifest.txt"), mf.encode(timer.ms()));
  out.commit();
}

struct SynthArgs {
  std::size_t width = 128;
  std::size_t height = 128;
  std::size_t bands = 3;
  std::size_t classes = 5;
  std::size_t block = 16;
  double spread = 2.0;
  std::string means_spec;
  std::string layout = "stripes";
};

void run_synth(const SynthArgs& sy, const SharedArgs& sa) {
  Timer timer;
  lc::SynthConfig cfg;
  cfg.width = sy.width;
  cfg.height = sy.height;
  cfg.bands = sy.bands;
  cfg.classes = sy.classes;
  cfg.block = sy.block;
  cfg.spread = sy.spread;
  cfg.seed = sa.seed;
  if (sy.layout == "grid") {
    cfg.grid_layout = true;
  } else if (sy.layout != "stripes") {
    throw lc::ConfigError("layout must be 'stripes' or 'grid'");
  }
  if (!sy.means_spec.empty()) cfg.means = parse_means_spec(sy.means_spec);

  auto scene = lc::generate_scene(cfg);
  scene.signatures.raster_ref = "scene.hdr";

  lc::OutputStager out;
  stage_raster(out, scene.raster, join(sa.out_dir, "scene.hdr"));
  stage_label_map(out, scene.truth, join(sa.out_dir, "truth.hdr"));
  out.add(join(sa.out_dir, "signatures.txt"), lc::encode_signature_set(scene.signatures));

  lc::Manifest mf;
  mf.command = "synth";
  mf.add("width", static_cast<std::uint64_t>(sy.width));
  mf.add("height", static_cast<std::uint64_t>(sy.height));
  mf.add("bands", static_cast<std::uint64_t>(sy.bands));
  mf.add("classes", static_cast<std::uint64_t>(sy.classes));
  mf.add("block", static_cast<std::uint64_t>(sy.block));
  mf.add("spread", sy.spread);
  mf.add("layout", sy.layout);
  mf.add("means", sy.means_spec.empty() ? "default" : sy.means_spec);
  mf.add("seed", sa.seed);
  mf.add("out_dir", sa.out_dir);
  mf.add("output_scene", join(sa.out_dir, "scene.hdr"));
  mf.add("output_truth", join(sa.out_dir, "truth.hdr"));
  mf.add("output_signatures", join(sa.out_dir, "signatures.txt"));
  out.add(join(sa.out_dir, "synth_manifest.txt"), mf.encode(timer.ms()));
  out.commit();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multispectral land-cover classification toolkit"};
  app.require_subcommand(1);

  std::string input, model_path, sig_path, truth_path, pred_path, out_path;

  auto* kmeans = app.add_subcommand("kmeans", "Cluster a raster with the row-mean-seeded k-means");
  KmeansArgs kmeans_ka;
  SharedArgs kmeans_sa;
  kmeans->add_option("raster", input, "Input raster header")->required();
  add_kmeans_flags(kmeans, kmeans_ka);
  add_preprocess_flags(kmeans, kmeans_sa);
  add_out_dir(kmeans, kmeans_sa);
  kmeans->callback([&] { run_kmeans(input, kmeans_ka, kmeans_sa); });

  auto* train = app.add_subcommand("train", "Train the perceptron from signature regions");
  TrainArgs train_ta;
  SharedArgs train_sa;
  train->add_option("raster", input, "Input raster header")->required();
  train->add_option("signatures", sig_path, "Signature set file")->required();
  add_train_flags(train, train_ta);
  train->add_option("--resume", train_ta.resume,
                    "Continue training from an existing model file (ignores --hidden)");
  train->add_option("--seed", train_sa.seed, "Weight-initialization and shuffle seed")
      ->capture_default_str();
  add_preprocess_flags(train, train_sa);
  add_out_dir(train, train_sa);
  train->callback([&] { run_train(input, sig_path, train_ta, train_sa); });

  auto* classify = app.add_subcommand("classify", "Classify a raster with a trained model");
  SharedArgs classify_sa;
  classify->add_option("model", model_path, "Trained model file")->required();
  classify->add_option("raster", input, "Input raster header")->required();
  classify->add_option("--median-window", classify_sa.median_window,
                       "Odd median-filter window; use the training-time value (0 disables)")
      ->capture_default_str();
  add_out_dir(classify, classify_sa);
  classify->callback([&] { run_classify(model_path, input, classify_sa); });

  auto* unsup = app.add_subcommand(
      "unsup-ann", "Cluster, then train the perceptron on cluster pseudo-labels");
  KmeansArgs unsup_ka;
  TrainArgs unsup_ta;
  SharedArgs unsup_sa;
  std::size_t samples_per_cluster = 500;
  unsup->add_option("raster", input, "Input raster header")->required();
  add_kmeans_flags(unsup, unsup_ka);
  add_train_flags(unsup, unsup_ta);
  unsup->add_option("--samples-per-cluster", samples_per_cluster,
                    "Pseudo-label sample cap per cluster")
      ->capture_default_str();
  unsup->add_option("--seed", unsup_sa.seed, "Sampling, initialization and shuffle seed")
      ->capture_default_str();
  add_preprocess_flags(unsup, unsup_sa);
  add_out_dir(unsup, unsup_sa);
  unsup->callback([&] { run_unsup_ann(input, unsup_ka, unsup_ta, samples_per_cluster, unsup_sa); });

  auto* evaluate = app.add_subcommand("evaluate", "Confusion matrix and accuracy report");
  SharedArgs eval_sa;
  evaluate->add_option("truth", truth_path, "Ground-truth label map header")->required();
  evaluate->add_option("predicted", pred_path, "Predicted label map header")->required();
  add_out_dir(evaluate, eval_sa);
  evaluate->callback([&] { run_evaluate(truth_path, pred_path, eval_sa); });

  auto* render = app.add_subcommand("render", "Render a label map to a P6 pixmap");
  SharedArgs render_sa;
  render->add_option("labels", input, "Label map header")->required();
  render->add_option("output", out_path, "Output .ppm path")->required();
  add_out_dir(render, render_sa);
  render->callback([&] { run_render(input, out_path, render_sa); });

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene with exact ground truth");
  SynthArgs synth_args;
  SharedArgs synth_sa;
  synth->add_option("--width", synth_args.width, "Scene width in pixels")->capture_default_str();
  synth->add_option("--height", synth_args.height, "Scene height in pixels")
      ->capture_default_str();
  synth->add_option("--bands", synth_args.bands, "Band count")->capture_default_str();
  synth->add_option("--classes", synth_args.classes, "Class count")->capture_default_str();
  synth->add_option("--block", synth_args.block, "Block size in pixels")->capture_default_str();
  synth->add_option("--spread", synth_args.spread, "Half-width of each class's uniform noise")
      ->capture_default_str();
  synth->add_option("--means", synth_args.means_spec,
                    "Per-class per-band means, 'a,b,c;d,e,f'; empty picks spaced defaults");
  synth->add_option("--layout", synth_args.layout, "Block-to-class layout: stripes or grid")
      ->capture_default_str();
  synth->add_option("--seed", synth_sa.seed, "Noise seed")->capture_default_str();
  add_out_dir(synth, synth_sa);
  synth->callback([&] { run_synth(synth_args, synth_sa); });

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 1;
    }
  } catch (const lc::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

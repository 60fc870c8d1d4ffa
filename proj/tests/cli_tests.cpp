#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include "landcover/ann.hpp"
#include "landcover/raster.hpp"
#include "landcover/textio.hpp"
#include "test_util.hpp"

using namespace landcover;

namespace {

std::string cli_path() {
  const char* p = std::getenv("LANDCOVER_CLI");
  REQUIRE_MESSAGE(p != nullptr, "LANDCOVER_CLI must point at the built binary");
  return p;
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const TempDir& td, const std::string& args) {
  static int serial = 0;
  const auto out_file = td.file("stdout" + std::to_string(serial) + ".txt");
  const auto err_file = td.file("stderr" + std::to_string(serial) + ".txt");
  ++serial;
  const std::string cmd =
      cli_path() + " " + args + " > " + out_file + " 2> " + err_file;
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file_text(out_file);
  r.err = read_file_text(err_file);
  return r;
}

// A small two-stripe scene written straight through the library.
std::string write_two_band_raster(const TempDir& td, const std::string& name) {
  Raster r;
  r.width = 8;
  r.height = 8;
  r.bands = 2;
  r.dtype = Dtype::U8;
  r.samples.resize(128);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t y = 0; y < 8; ++y) {
      for (std::size_t x = 0; x < 8; ++x) {
        r.samples[b * 64 + y * 8 + x] = y < 4 ? 20.0 + double(x % 3) : 200.0 + double(x % 3);
      }
    }
  }
  const auto hdr = td.file(name);
  save_raster(r, hdr);
  return hdr;
}

}  // namespace

TEST_CASE("top-level help lists every subcommand") {
  TempDir td;
  const auto r = run_cli(td, "--help");
  CHECK(r.code == 0);
  for (const char* name :
       {"kmeans", "train", "classify", "unsup-ann", "evaluate", "render", "synth"}) {
    CHECK_MESSAGE(r.out.find(name) != std::string::npos, "missing subcommand ", name);
  }
}

TEST_CASE("subcommand help shows the flags with their defaults") {
  TempDir td;
  const auto km = run_cli(td, "kmeans --help");
  CHECK(km.code == 0);
  for (const char* flag : {"--k", "--max-iter", "--tol", "--median-window", "--normalize",
                           "--no-normalize", "--out-dir"}) {
    CHECK_MESSAGE(km.out.find(flag) != std::string::npos, "missing flag ", flag);
  }
  CHECK(km.out.find("100") != std::string::npos);  // --max-iter default

  const auto tr = run_cli(td, "train --help");
  CHECK(tr.code == 0);
  for (const char* flag : {"--eta", "--epochs", "--hidden", "--tau", "--shuffle", "--seed"}) {
    CHECK_MESSAGE(tr.out.find(flag) != std::string::npos, "missing flag ", flag);
  }
  CHECK(tr.out.find("0.2") != std::string::npos);  // --eta default
  CHECK(tr.out.find("500") != std::string::npos);  // --epochs default
  CHECK(tr.out.find("0.5") != std::string::npos);  // --tau default

  const auto ua = run_cli(td, "unsup-ann --help");
  CHECK(ua.out.find("--samples-per-cluster") != std::string::npos);
  CHECK(ua.out.find("500") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
  TempDir td;
  CHECK(run_cli(td, "").code == 1);
  CHECK(run_cli(td, "frobnicate").code == 1);
  CHECK(run_cli(td, "kmeans").code == 1);  // missing required raster and --k
  const auto hdr = write_two_band_raster(td, "in.hdr");
  CHECK(run_cli(td, "kmeans " + hdr).code == 1);  // --k is required
}

TEST_CASE("missing input raster exits 2 and leaves no partial outputs") {
  TempDir td;
  const auto out = td.file("out");
  const auto r = run_cli(td, "kmeans " + td.file("absent.hdr") + " --k 3 --out-dir " + out);
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
  CHECK(!std::filesystem::exists(std::filesystem::path(out) / "labels.hdr"));
  CHECK(!std::filesystem::exists(std::filesystem::path(out) / "labels.bsq"));
  CHECK(!std::filesystem::exists(std::filesystem::path(out) / "cluster_model.txt"));
  CHECK(!std::filesystem::exists(std::filesystem::path(out) / "kmeans_manifest.txt"));
}

TEST_CASE("config violations exit 3") {
  TempDir td;
  const auto hdr = write_two_band_raster(td, "in.hdr");
  CHECK(run_cli(td, "kmeans " + hdr + " --k 0 --out-dir " + td.file("o1")).code == 3);
  CHECK(run_cli(td, "kmeans " + hdr + " --k 2 --median-window 4 --out-dir " +
                        td.file("o2")).code == 3);

  // Constant rasters have zero row-mean spread: degenerate for k > 1.
  Raster flat;
  flat.width = 4;
  flat.height = 4;
  flat.bands = 1;
  flat.dtype = Dtype::U8;
  flat.samples.assign(16, 9.0);
  const auto flat_hdr = td.file("flat.hdr");
  save_raster(flat, flat_hdr);
  CHECK(run_cli(td, "kmeans " + flat_hdr + " --k 2 --out-dir " + td.file("o3")).code == 3);
  CHECK(run_cli(td, "kmeans " + flat_hdr + " --k 1 --out-dir " + td.file("o4")).code == 0);
}

TEST_CASE("kmeans on a two-stripe raster writes a decodable two-class map") {
  TempDir td;
  const auto hdr = write_two_band_raster(td, "in.hdr");
  const auto out = td.file("km");
  const auto r = run_cli(td, "kmeans " + hdr + " --k 2 --out-dir " + out);
  CHECK(r.code == 0);

  const auto lm = load_label_map((std::filesystem::path(out) / "labels.hdr").string());
  CHECK(lm.width == 8);
  CHECK(lm.height == 8);
  const auto top = lm.at(0, 0);
  const auto bottom = lm.at(0, 7);
  CHECK(top != bottom);
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 8; ++x) {
      CHECK(lm.at(x, y) == (y < 4 ? top : bottom));
    }
  }
  CHECK(std::filesystem::exists(std::filesystem::path(out) / "cluster_model.txt"));
  CHECK(std::filesystem::exists(std::filesystem::path(out) / "kmeans_manifest.txt"));

  const auto manifest =
      read_file_text((std::filesystem::path(out) / "kmeans_manifest.txt").string());
  CHECK(manifest.find("command kmeans") != std::string::npos);
  CHECK(manifest.find("k 2") != std::string::npos);
  CHECK(manifest.find("max_iter 100") != std::string::npos);
  CHECK(manifest.find("normalize true") != std::string::npos);
  CHECK(manifest.find("elapsed_ms") != std::string::npos);
}

TEST_CASE("synth then train then classify recovers the scene") {
  TempDir td;
  const auto s = td.file("scene");
  CHECK(run_cli(td, "synth --width 32 --height 32 --classes 2 --block 8 --seed 3 --out-dir " +
                        s).code == 0);
  const auto scene = (std::filesystem::path(s) / "scene.hdr").string();
  const auto sigs = (std::filesystem::path(s) / "signatures.txt").string();
  const auto t = td.file("train");
  CHECK(run_cli(td, "train " + scene + " " + sigs + " --epochs 60 --seed 5 --out-dir " +
                        t).code == 0);

  // The error trace must improve from the first epoch to the last.
  const auto trace =
      read_file_text((std::filesystem::path(t) / "error_trace.txt").string());
  double first = -1.0, last = -1.0;
  for (const auto& rec : parse_records(trace)) {
    REQUIRE(rec.values.size() == 1);
    const double v = parse_double(rec.values[0]);
    if (first < 0) first = v;
    last = v;
  }
  CHECK(first > last);

  const auto c = td.file("cls");
  CHECK(run_cli(td, "classify " + (std::filesystem::path(t) / "model.txt").string() + " " +
                        scene + " --out-dir " + c).code == 0);
  const auto pred = load_label_map((std::filesystem::path(c) / "classified.hdr").string());
  const auto truth = load_label_map((std::filesystem::path(s) / "truth.hdr").string());
  std::size_t agree = 0;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    agree += pred.labels[i] == truth.labels[i];
  }
  CHECK(agree >= pred.labels.size() * 95 / 100);
}

TEST_CASE("resuming for the remaining epochs matches one uninterrupted run") {
  TempDir td;
  const auto s = td.file("scene");
  REQUIRE(run_cli(td, "synth --width 32 --height 32 --classes 2 --block 8 --seed 3 "
                      "--out-dir " + s).code == 0);
  const auto scene = (std::filesystem::path(s) / "scene.hdr").string();
  const auto sigs = (std::filesystem::path(s) / "signatures.txt").string();

  const auto full = td.file("full");
  REQUIRE(run_cli(td, "train " + scene + " " + sigs + " --epochs 60 --seed 5 --out-dir " +
                          full).code == 0);
  const auto half = td.file("half");
  REQUIRE(run_cli(td, "train " + scene + " " + sigs + " --epochs 30 --seed 5 --out-dir " +
                          half).code == 0);
  const auto rest = td.file("rest");
  REQUIRE(run_cli(td, "train " + scene + " " + sigs + " --epochs 30 --resume " +
                          (std::filesystem::path(half) / "model.txt").string() +
                          " --out-dir " + rest).code == 0);

  // Presentation order is fixed and the model file round-trips bit-exactly,
  // so 30 epochs plus 30 resumed epochs equals 60 straight epochs.
  const auto full_model =
      read_file_text((std::filesystem::path(full) / "model.txt").string());
  const auto rest_model =
      read_file_text((std::filesystem::path(rest) / "model.txt").string());
  CHECK(full_model == rest_model);

  const auto manifest =
      read_file_text((std::filesystem::path(rest) / "train_manifest.txt").string());
  CHECK(manifest.find("resume ") != std::string::npos);
}

TEST_CASE("resume rejects a model trained for a different band count") {
  TempDir td;
  const auto s = td.file("scene");
  REQUIRE(run_cli(td, "synth --width 16 --height 16 --classes 2 --block 8 --bands 3 "
                      "--seed 4 --out-dir " + s).code == 0);
  const auto t = td.file("t");
  REQUIRE(run_cli(td, "train " + (std::filesystem::path(s) / "scene.hdr").string() + " " +
                          (std::filesystem::path(s) / "signatures.txt").string() +
                          " --epochs 5 --out-dir " + t).code == 0);

  const auto two_band = write_two_band_raster(td, "two.hdr");
  SignatureSet sig;
  sig.raster_ref = "two.hdr";
  sig.classes.push_back({"a", {255, 0, 0}, {{0, 0, 2, 2}}});
  sig.classes.push_back({"b", {0, 255, 0}, {{4, 4, 2, 2}}});
  const auto sig_path = td.file("sig.txt");
  save_signature_set(sig, sig_path);

  const auto r = run_cli(td, "train " + two_band + " " + sig_path + " --epochs 5 --resume " +
                                 (std::filesystem::path(t) / "model.txt").string() +
                                 " --out-dir " + td.file("r"));
  CHECK(r.code == 2);
  CHECK(!std::filesystem::exists(std::filesystem::path(td.file("r")) / "model.txt"));
}

TEST_CASE("training rejects overlapping signature regions") {
  TempDir td;
  const auto hdr = write_two_band_raster(td, "in.hdr");
  SignatureSet sig;
  sig.raster_ref = "in.hdr";
  sig.classes.push_back({"a", {255, 0, 0}, {{0, 0, 3, 3}}});
  sig.classes.push_back({"b", {0, 255, 0}, {{2, 2, 3, 3}}});
  const auto sig_path = td.file("sig.txt");
  save_signature_set(sig, sig_path);
  const auto r = run_cli(td, "train " + hdr + " " + sig_path + " --epochs 5 --out-dir " +
                                 td.file("t"));
  CHECK(r.code == 2);
  CHECK(!std::filesystem::exists(std::filesystem::path(td.file("t")) / "model.txt"));
}

TEST_CASE("classifying a constant raster yields a single-valued map") {
  TempDir td;
  const auto s = td.file("scene");
  REQUIRE(run_cli(td, "synth --width 16 --height 16 --classes 2 --block 8 --seed 4 "
                      "--out-dir " + s).code == 0);
  const auto t = td.file("t");
  REQUIRE(run_cli(td, "train " + (std::filesystem::path(s) / "scene.hdr").string() + " " +
                          (std::filesystem::path(s) / "signatures.txt").string() +
                          " --epochs 40 --seed 1 --out-dir " + t).code == 0);

  Raster flat;
  flat.width = 5;
  flat.height = 5;
  flat.bands = 3;
  flat.dtype = Dtype::U8;
  flat.samples.assign(75, 33.0);
  const auto flat_hdr = td.file("flat.hdr");
  save_raster(flat, flat_hdr);
  const auto c = td.file("c");
  REQUIRE(run_cli(td, "classify " + (std::filesystem::path(t) / "model.txt").string() + " " +
                          flat_hdr + " --out-dir " + c).code == 0);
  const auto lm = load_label_map((std::filesystem::path(c) / "classified.hdr").string());
  for (auto l : lm.labels) CHECK(l == lm.labels[0]);
}

TEST_CASE("corrupted model files exit 2") {
  TempDir td;
  const auto hdr = write_two_band_raster(td, "in.hdr");
  const auto model = td.file("model.txt");
  write_file_bytes(model, std::string("inputs 2\nhidden 3\ngarbage\n"));
  CHECK(run_cli(td, "classify " + model + " " + hdr + " --out-dir " + td.file("o")).code == 2);
}

TEST_CASE("band-count mismatch between model and raster exits 2") {
  TempDir td;
  const auto s = td.file("scene");
  REQUIRE(run_cli(td, "synth --width 16 --height 16 --classes 2 --block 8 --bands 3 "
                      "--seed 4 --out-dir " + s).code == 0);
  const auto t = td.file("t");
  REQUIRE(run_cli(td, "train " + (std::filesystem::path(s) / "scene.hdr").string() + " " +
                          (std::filesystem::path(s) / "signatures.txt").string() +
                          " --epochs 5 --out-dir " + t).code == 0);
  const auto two_band = write_two_band_raster(td, "two.hdr");
  CHECK(run_cli(td, "classify " + (std::filesystem::path(t) / "model.txt").string() + " " +
                        two_band + " --out-dir " + td.file("o")).code == 2);
}

TEST_CASE("evaluating a map against itself reports a perfect score") {
  TempDir td;
  const auto s = td.file("scene");
  REQUIRE(run_cli(td, "synth --width 16 --height 16 --classes 2 --block 8 --seed 6 "
                      "--out-dir " + s).code == 0);
  const auto truth = (std::filesystem::path(s) / "truth.hdr").string();
  const auto e = td.file("ev");
  CHECK(run_cli(td, "evaluate " + truth + " " + truth + " --out-dir " + e).code == 0);
  const auto report = read_file_text((std::filesystem::path(e) / "report.txt").string());
  CHECK(report.find("Overall accuracy: 100.00%") != std::string::npos);
  CHECK(report.find("0.00%") != std::string::npos);
  CHECK(std::filesystem::exists(std::filesystem::path(e) / "metrics.txt"));
}

TEST_CASE("evaluate refuses maps of different shapes or class counts") {
  TempDir td;
  const auto a = td.file("a");
  const auto b = td.file("b");
  REQUIRE(run_cli(td, "synth --width 16 --height 16 --classes 2 --block 8 --out-dir " +
                          a).code == 0);
  REQUIRE(run_cli(td, "synth --width 24 --height 24 --classes 3 --block 8 --out-dir " +
                          b).code == 0);
  const auto ta = (std::filesystem::path(a) / "truth.hdr").string();
  const auto tb = (std::filesystem::path(b) / "truth.hdr").string();
  CHECK(run_cli(td, "evaluate " + ta + " " + tb + " --out-dir " + td.file("e")).code == 2);
}

TEST_CASE("render writes a P6 pixmap that inverts back to the map") {
  TempDir td;
  const auto s = td.file("scene");
  REQUIRE(run_cli(td, "synth --width 16 --height 16 --classes 3 --block 4 --out-dir " +
                          s).code == 0);
  const auto truth_hdr = (std::filesystem::path(s) / "truth.hdr").string();
  const auto ppm = td.file("truth.ppm");
  CHECK(run_cli(td, "render " + truth_hdr + " " + ppm + " --out-dir " + td.file("r")).code ==
        0);

  const auto bytes = read_file_bytes(ppm);
  REQUIRE(bytes.size() > 15);
  CHECK(std::string(bytes.begin(), bytes.begin() + 3) == "P6\n");

  const auto truth = load_label_map(truth_hdr);
  const auto decoded = decode_ppm(bytes, truth.legend);
  CHECK(decoded.labels == truth.labels);
}

TEST_CASE("unsup-ann with one cluster maps the whole image to one class") {
  TempDir td;
  const auto s = td.file("scene");
  REQUIRE(run_cli(td, "synth --width 16 --height 16 --classes 2 --block 8 --seed 8 "
                      "--out-dir " + s).code == 0);
  const auto ua = td.file("ua");
  CHECK(run_cli(td, "unsup-ann " + (std::filesystem::path(s) / "scene.hdr").string() +
                        " --k 1 --epochs 20 --seed 8 --out-dir " + ua).code == 0);
  const auto lm = load_label_map((std::filesystem::path(ua) / "ann_labels.hdr").string());
  for (auto l : lm.labels) CHECK(l == 0);
}

TEST_CASE("repeated runs with one seed produce identical data files") {
  TempDir td;
  const auto a = td.file("a");
  const auto b = td.file("b");
  const std::string args = "synth --width 24 --height 24 --classes 3 --block 8 --seed 77 ";
  REQUIRE(run_cli(td, args + "--out-dir " + a).code == 0);
  REQUIRE(run_cli(td, args + "--out-dir " + b).code == 0);
  for (const char* f : {"scene.bsq", "truth.bsq", "signatures.txt"}) {
    CHECK(read_file_bytes((std::filesystem::path(a) / f).string()) ==
          read_file_bytes((std::filesystem::path(b) / f).string()));
  }

  const auto ua = td.file("ua");
  const auto ub = td.file("ub");
  const std::string uargs = "unsup-ann " +
                            (std::filesystem::path(a) / "scene.hdr").string() +
                            " --k 3 --epochs 25 --seed 5 ";
  REQUIRE(run_cli(td, uargs + "--out-dir " + ua).code == 0);
  REQUIRE(run_cli(td, uargs + "--out-dir " + ub).code == 0);
  for (const char* f : {"ann_labels.bsq", "kmeans_labels.bsq", "model.txt",
                        "cluster_model.txt"}) {
    CHECK(read_file_bytes((std::filesystem::path(ua) / f).string()) ==
          read_file_bytes((std::filesystem::path(ub) / f).string()));
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "wnms/harness.hpp"
#include "wnms/pgm.hpp"

using namespace wnms;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

const std::string kTinyConfig =
    "m=8\nr=4\nr_a=2\nkappa=2\nn=300\nT=40\ngd_T=80\nalgo=both\nseed=5\nstride=1\n";

}  // namespace

TEST_CASE("parse_config reads presets with overrides") {
  const ExperimentConfig cfg = parse_config("preset=fig2a\nseed=7\n");
  CHECK(cfg.preset == "fig2a");
  CHECK(cfg.seed == 7);
  CHECK(cfg.T == -1);
}

TEST_CASE("parse_config rejects bad input with line numbers") {
  try {
    parse_config("m=10\nr=12\nT=5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("r exceeds m") != std::string::npos);
  }

  try {
    parse_config("m=10\nwhat=3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("what") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config("m=ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("m=5\nm=6\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("preset=fig2a\nm=9\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("preset=nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("just a line\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(kTinyConfig + "r_a=0\n"), ConfigError);
}

TEST_CASE("config round-trips through emit and parse") {
  const ExperimentConfig a = parse_config(kTinyConfig + "spectrum=power:0.6\nnoise=0.001\n");
  const ExperimentConfig b = parse_config(emit_config(a));
  CHECK(a == b);
  CHECK(emit_config(a) == emit_config(b));

  const ExperimentConfig p = parse_config("preset=fig3a\nseed=11\nT=25\n");
  const ExperimentConfig q = parse_config(emit_config(p));
  CHECK(p == q);
}

TEST_CASE("comments and blank lines are ignored") {
  const ExperimentConfig cfg =
      parse_config("# heading\n\n  m=6 # trailing\n r=3\nr_a=2\nkappa=1.5\nn=50\nT=1\n");
  CHECK(cfg.m == 6);
  CHECK(cfg.r == 3);
}

TEST_CASE("emit_csv writes header-only for an empty trace") {
  TempDir dir("wnms_csv_empty");
  const std::string path = dir.str() + "/empty.csv";
  emit_csv(Trace{}, path);
  const std::string text = slurp(path);
  CHECK(text == "t,objective,grad_norm_X\n");
}

TEST_CASE("emit_csv single row and bit-exact round-trip") {
  TempDir dir("wnms_csv_rt");
  // a real trace with all columns present
  ExperimentConfig cfg = parse_config(kTinyConfig);
  cfg.out_dir = dir.str();
  const RunManifest manifest = run_preset(cfg);
  const std::string path = dir.str() + "/" + manifest.runs[0].trace_file;
  const CsvTable table = parse_csv(path);
  CHECK(table.header.size() >= 5);
  CHECK(table.rows.size() == 41);

  // re-emitting the parsed numbers must reproduce the file byte for byte
  const std::string again = dir.str() + "/again.csv";
  std::ofstream out(again);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    out << (c == 0 ? "" : ",") << table.header[c];
  }
  out << "\n";
  char buf[40];
  for (const auto& row : table.rows) {
    out << static_cast<long>(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      out << "," << buf;
    }
    out << "\n";
  }
  out.close();
  CHECK(slurp(again) == slurp(path));
}

TEST_CASE("emit_pgm fixed values and round-trip") {
  TempDir dir("wnms_pgm");
  Matrix two(2, 2);
  two << 0.0, 1.0, 1.0, 0.0;
  const std::string path = dir.str() + "/two.pgm";
  emit_pgm(two, path);
  const Matrix back = load_pgm(path);
  CHECK(back(0, 0) == 0.0);
  CHECK(back(0, 1) == 255.0);
  CHECK(back(1, 0) == 255.0);
  CHECK(back(1, 1) == 0.0);

  const std::string flat = dir.str() + "/flat.pgm";
  emit_pgm(Matrix::Constant(3, 3, 4.2), flat);
  const Matrix flat_back = load_pgm(flat);
  CHECK((flat_back.array() == 128.0).all());

  // integer-valued matrix spanning [0, 255]: the rescale is the identity
  Matrix ramp(2, 3);
  ramp << 0, 17, 101, 230, 255, 3;
  const std::string ramp_path = dir.str() + "/ramp.pgm";
  emit_pgm(ramp, ramp_path);
  const Matrix ramp_back = load_pgm(ramp_path);
  CHECK((ramp_back - ramp).norm() == 0.0);
  const std::string ramp_again = dir.str() + "/ramp2.pgm";
  emit_pgm(ramp_back, ramp_again);
  CHECK(slurp(ramp_again) == slurp(ramp_path));
}

TEST_CASE("run_preset on a custom config is deterministic and self-consistent") {
  TempDir dir_a("wnms_custom_a"), dir_b("wnms_custom_b");
  ExperimentConfig cfg = parse_config(kTinyConfig);
  cfg.out_dir = dir_a.str();
  const RunManifest first = run_preset(cfg);
  cfg.out_dir = dir_b.str();
  const RunManifest second = run_preset(cfg);

  REQUIRE(first.runs.size() == 2);
  for (const RunSummary& s : first.runs) {
    CHECK(fs::exists(fs::path(dir_a.str()) / s.trace_file));
  }
  CHECK(fs::exists(fs::path(dir_a.str()) / first.manifest_file));

  // byte-identical traces across reruns with the same seed
  for (std::size_t i = 0; i < first.runs.size(); ++i) {
    CHECK(slurp(dir_a.str() + "/" + first.runs[i].trace_file) ==
          slurp(dir_b.str() + "/" + second.runs[i].trace_file));
  }

  // paired runs consumed the same ensemble
  CHECK(first.runs[0].ensemble_checksum == first.runs[1].ensemble_checksum);
  CHECK(first.runs[0].ensemble_checksum != 0);
}

TEST_CASE("preset runs honor iteration overrides and stay deterministic") {
  TempDir dir_a("wnms_fig2a_a"), dir_b("wnms_fig2a_b");
  ExperimentConfig cfg = parse_config("preset=fig2a\nseed=7\nT=25\ngd_T=50\n");
  cfg.out_dir = dir_a.str();
  const RunManifest first = run_preset(cfg);
  REQUIRE(first.runs.size() == 6);  // three kappas, rgd + gd each

  cfg.out_dir = dir_b.str();
  const RunManifest second = run_preset(cfg);
  for (std::size_t i = 0; i < first.runs.size(); ++i) {
    CHECK(slurp(dir_a.str() + "/" + first.runs[i].trace_file) ==
          slurp(dir_b.str() + "/" + second.runs[i].trace_file));
  }

  // rgd/gd pairs share data group by group
  for (std::size_t g = 0; g < 3; ++g) {
    CHECK(first.runs[2 * g].ensemble_checksum == first.runs[2 * g + 1].ensemble_checksum);
  }
  const CsvTable table = parse_csv(dir_a.str() + "/" + first.runs[0].trace_file);
  CHECK(table.rows.size() == 26);
}

TEST_CASE("fig3c preset starts fully aligned when r = m") {
  TempDir dir("wnms_fig3c");
  ExperimentConfig cfg = parse_config("preset=fig3c\nseed=3\nT=0\n");
  cfg.out_dir = dir.str();
  const RunManifest manifest = run_preset(cfg);
  int full_runs = 0;
  for (const RunSummary& s : manifest.runs) {
    if (s.name.find("rfull") == std::string::npos) continue;
    ++full_runs;
    const CsvTable table = parse_csv(dir.str() + "/" + s.trace_file);
    const auto col = std::find(table.header.begin(), table.header.end(), "align_error");
    REQUIRE(col != table.header.end());
    const std::size_t idx = static_cast<std::size_t>(col - table.header.begin());
    CHECK(std::abs(table.rows[0][idx]) < 1e-10);
  }
  CHECK(full_runs == 3);
}

TEST_CASE("memory cap refuses oversized ensembles by name") {
  TempDir dir("wnms_cap");
  setenv("WNMS_MEM_CAP_MB", "1", 1);
  ExperimentConfig cfg = parse_config("m=64\nr=4\nr_a=2\nkappa=2\nn=5000\nT=1\nseed=1\n");
  cfg.out_dir = dir.str();
  try {
    run_preset(cfg);
    unsetenv("WNMS_MEM_CAP_MB");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    unsetenv("WNMS_MEM_CAP_MB");
    const std::string msg = e.what();
    CHECK(msg.find("bytes") != std::string::npos);
    CHECK(msg.find("cap") != std::string::npos);
  }
  setenv("WNMS_MEM_CAP_MB", "junk", 1);
  CHECK_THROWS_AS(memory_cap_bytes(), ConfigError);
  unsetenv("WNMS_MEM_CAP_MB");
  CHECK(memory_cap_bytes() == 2048ull * 1024 * 1024);
}

TEST_CASE("preset listing covers the paper experiments") {
  const auto names = preset_names();
  CHECK(names.size() == 8);
  for (const char* expected : {"fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig3c",
                               "img-blockwave", "img-lift"}) {
    CHECK(std::find(names.begin(), names.end(), expected) != names.end());
  }
}

TEST_CASE("rank-one readout inverts the lift") {
  const Vector a = synthetic_source_image(8);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
  const Vector b = synthetic_source_image(8);
  CHECK((a - b).norm() == 0.0);
  const Matrix lifted = a * a.transpose();
  const Vector readout = rank_one_readout(lifted);
  CHECK(std::min((readout - a).norm(), (readout + a).norm()) < 1e-10);
}

TEST_CASE("manifest records every referenced file") {
  TempDir dir("wnms_manifest");
  ExperimentConfig cfg = parse_config(kTinyConfig);
  cfg.out_dir = dir.str();
  const RunManifest manifest = run_preset(cfg);
  const std::string text = slurp(dir.str() + "/" + manifest.manifest_file);
  CHECK(text.find("cfg.m=8") != std::string::npos);
  CHECK(text.find("run.0.name=rgd") != std::string::npos);
  CHECK(text.find("run.1.name=gd") != std::string::npos);
  CHECK(text.find("ensemble_checksum=") != std::string::npos);
  for (const RunSummary& s : manifest.runs) {
    CHECK(fs::exists(fs::path(dir.str()) / s.trace_file));
    for (const std::string& img : s.image_files) {
      CHECK(fs::exists(fs::path(dir.str()) / img));
    }
  }
}

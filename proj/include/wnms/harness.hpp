#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wnms/baseline_gd.hpp"
#include "wnms/model.hpp"
#include "wnms/sensing.hpp"
#include "wnms/trace.hpp"
#include "wnms/wn_solver.hpp"

namespace wnms {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One experiment: either a named preset (with optional seed/out/T/gd_T/stride
// overrides) or a fully explicit instance. Parsed from key=value text, one
// pair per line, `#` comments.
struct ExperimentConfig {
  std::string preset;
  std::uint64_t seed = 1;
  std::string out_dir = "runs";
  long trace_stride = 1;

  // Explicit-instance parameters; ignored when `preset` is set except for
  // T and gd_T, which override the preset budgets when >= 0.
  Index m = 10;
  Index r = 5;
  Index r_A = 3;
  double kappa = 10.0;
  long n = 3000;
  bool population = false;
  double noise_std = 0.0;
  SpectrumScheme scheme = SpectrumScheme::log_spaced();
  bool run_rgd = true;
  bool run_gd = false;
  double eta = 0.1;
  double mu = 2.0;
  long T = -1;
  RetractionKind retraction = RetractionKind::Polar;
  double theta_init_scale = 1.0;
  double gd_eta = 0.1;
  long gd_T = -1;
  double gd_init_scale = 0.1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig parse_config(const std::string& text);
std::string emit_config(const ExperimentConfig& config);

std::vector<std::string> preset_names();

struct RunSummary {
  std::string name;
  std::string trace_file;  // relative to the manifest's directory
  double final_sq_error = -1.0;
  long iters_to_1e6 = -1;   // first recorded t with squared error <= 1e-6
  long iters_to_1e10 = -1;  // same for 1e-10
  std::uint64_t ensemble_checksum = 0;  // 0 for population runs
  double lift_rel_error = -1.0;         // img-lift readout; < 0 when not applicable
  std::vector<std::string> image_files;
};

struct RunManifest {
  ExperimentConfig config;
  double wall_clock_sec = 0.0;
  std::string manifest_file;
  std::vector<RunSummary> runs;
};

// Execute a preset (or explicit config): all algorithm variants on shared
// data, traces as CSV, key=value manifest, PGM images for the image presets.
RunManifest run_preset(const ExperimentConfig& config);

// One row per record, 17 significant digits, "\n" endings. Columns present
// only when the trace carries them (saddle_dists expand to sd_0.., singular
// tracks to phi_s1.. and th_s1..).
void emit_csv(const Trace& trace, const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable parse_csv(const std::string& path);

// Memory cap applied to dense-ensemble allocation, overridable through the
// WNMS_MEM_CAP_MB environment variable (default 2048).
std::uint64_t memory_cap_bytes();

// Deterministic grayscale source for the lifted-recovery preset, vectorized
// row-major and unit-normalized.
Vector synthetic_source_image(Index side);

// Leading singular vector of z scaled by the root of its singular value;
// the estimate of the lifted source vector.
Vector rank_one_readout(const Matrix& z);

}  // namespace wnms

#include "wnms/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

#include "wnms/diagnostics.hpp"
#include "wnms/pgm.hpp"

namespace wnms {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config text format

struct KeyVal {
  std::string key;
  std::string value;
  long line;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<KeyVal> tokenize_config(const std::string& text) {
  std::vector<KeyVal> pairs;
  std::istringstream in(text);
  std::string raw;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected key=value");
    }
    KeyVal kv{trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)), line};
    if (kv.key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
    pairs.push_back(std::move(kv));
  }
  return pairs;
}

[[noreturn]] void bad_value(const KeyVal& kv, const std::string& expected) {
  throw ConfigError("line " + std::to_string(kv.line) + ": key '" + kv.key + "' expects " +
                    expected + ", got '" + kv.value + "'");
}

double parse_double(const KeyVal& kv) {
  try {
    std::size_t used = 0;
    const double v = std::stod(kv.value, &used);
    if (used != kv.value.size()) bad_value(kv, "a number");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(kv, "a number");
  }
}

long parse_long(const KeyVal& kv) {
  try {
    std::size_t used = 0;
    const long v = std::stol(kv.value, &used);
    if (used != kv.value.size()) bad_value(kv, "an integer");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(kv, "an integer");
  }
}

std::uint64_t parse_u64(const KeyVal& kv) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(kv.value, &used);
    if (used != kv.value.size()) bad_value(kv, "an unsigned integer");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(kv, "an unsigned integer");
  }
}

bool parse_bool(const KeyVal& kv) {
  if (kv.value == "true" || kv.value == "1") return true;
  if (kv.value == "false" || kv.value == "0") return false;
  bad_value(kv, "true or false");
}

SpectrumScheme parse_spectrum(const KeyVal& kv) {
  if (kv.value == "log") return SpectrumScheme::log_spaced();
  if (kv.value.rfind("power:", 0) == 0) {
    KeyVal sub{kv.key, kv.value.substr(6), kv.line};
    return SpectrumScheme::power_spaced(parse_double(sub));
  }
  bad_value(kv, "'log' or 'power:<p>'");
}

RetractionKind parse_retraction(const KeyVal& kv) {
  if (kv.value == "polar") return RetractionKind::Polar;
  if (kv.value == "qr") return RetractionKind::QR;
  if (kv.value == "cayley") return RetractionKind::Cayley;
  bad_value(kv, "'polar', 'qr', or 'cayley'");
}

std::string spectrum_to_string(const SpectrumScheme& s) {
  if (s.kind == SpectrumKind::LogSpaced) return "log";
  return "power:" + fmt_double(s.p);
}

std::string retraction_to_string(RetractionKind kind) {
  switch (kind) {
    case RetractionKind::Polar: return "polar";
    case RetractionKind::QR: return "qr";
    case RetractionKind::Cayley: return "cayley";
  }
  return "polar";
}

void validate_explicit(const ExperimentConfig& cfg) {
  if (cfg.m < 1) throw ConfigError("m must be positive");
  if (cfg.r < 1) throw ConfigError("r must be positive");
  if (cfg.r_A < 1) throw ConfigError("r_a must be positive");
  if (cfg.r > cfg.m) throw ConfigError("r exceeds m");
  if (cfg.r_A > cfg.m) throw ConfigError("r_a exceeds m");
  if (cfg.run_rgd && cfg.r_A > cfg.r) throw ConfigError("r_a exceeds r");
  if (cfg.kappa < 1.0) throw ConfigError("kappa must be >= 1");
  if (!cfg.population && cfg.n < 1) throw ConfigError("n must be positive");
  if (cfg.population && cfg.noise_std != 0.0) {
    throw ConfigError("noise requires a dense ensemble");
  }
  if (cfg.noise_std < 0.0) throw ConfigError("noise must be >= 0");
  if (cfg.scheme.kind == SpectrumKind::PowerSpaced &&
      !(cfg.scheme.p > 0.0 && cfg.scheme.p <= 1.0)) {
    throw ConfigError("power-spacing exponent must lie in (0, 1]");
  }
  if (!cfg.run_rgd && !cfg.run_gd) throw ConfigError("select at least one of rgd, gd");
  if (cfg.run_rgd) {
    if (!(cfg.eta > 0.0)) throw ConfigError("eta must be positive");
    if (!(cfg.mu > 0.0)) throw ConfigError("mu must be positive");
    if (cfg.T < 0) throw ConfigError("T must be set (>= 0)");
    if (std::abs(cfg.theta_init_scale) > 2.0) throw ConfigError("theta_init must satisfy |scale| <= 2");
  }
  if (cfg.run_gd) {
    if (!(cfg.gd_eta > 0.0)) throw ConfigError("gd_eta must be positive");
    if (cfg.gd_T < 0) throw ConfigError("gd_T must be set (>= 0)");
  }
  if (cfg.trace_stride < 1) throw ConfigError("stride must be >= 1");
}

const std::set<std::string> kPresetCompatibleKeys = {"preset", "seed", "out", "T", "gd_T",
                                                     "stride"};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  bool algo_seen = false;
  for (const KeyVal& kv : tokenize_config(text)) {
    if (!seen.insert(kv.key).second) {
      throw ConfigError("line " + std::to_string(kv.line) + ": duplicate key '" + kv.key + "'");
    }
    if (kv.key == "preset") {
      cfg.preset = kv.value;
    } else if (kv.key == "seed") {
      cfg.seed = parse_u64(kv);
    } else if (kv.key == "out") {
      cfg.out_dir = kv.value;
    } else if (kv.key == "stride") {
      cfg.trace_stride = parse_long(kv);
    } else if (kv.key == "m") {
      cfg.m = parse_long(kv);
    } else if (kv.key == "r") {
      cfg.r = parse_long(kv);
    } else if (kv.key == "r_a") {
      cfg.r_A = parse_long(kv);
    } else if (kv.key == "kappa") {
      cfg.kappa = parse_double(kv);
    } else if (kv.key == "n") {
      cfg.n = parse_long(kv);
    } else if (kv.key == "population") {
      cfg.population = parse_bool(kv);
    } else if (kv.key == "noise") {
      cfg.noise_std = parse_double(kv);
    } else if (kv.key == "spectrum") {
      cfg.scheme = parse_spectrum(kv);
    } else if (kv.key == "algo") {
      algo_seen = true;
      if (kv.value == "rgd") {
        cfg.run_rgd = true;
        cfg.run_gd = false;
      } else if (kv.value == "gd") {
        cfg.run_rgd = false;
        cfg.run_gd = true;
      } else if (kv.value == "both") {
        cfg.run_rgd = cfg.run_gd = true;
      } else {
        bad_value(kv, "'rgd', 'gd', or 'both'");
      }
    } else if (kv.key == "eta") {
      cfg.eta = parse_double(kv);
    } else if (kv.key == "mu") {
      cfg.mu = parse_double(kv);
    } else if (kv.key == "T") {
      cfg.T = parse_long(kv);
    } else if (kv.key == "retraction") {
      cfg.retraction = parse_retraction(kv);
    } else if (kv.key == "theta_init") {
      cfg.theta_init_scale = parse_double(kv);
    } else if (kv.key == "gd_eta") {
      cfg.gd_eta = parse_double(kv);
    } else if (kv.key == "gd_T") {
      cfg.gd_T = parse_long(kv);
    } else if (kv.key == "gd_init") {
      cfg.gd_init_scale = parse_double(kv);
    } else {
      throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
    }
  }
  (void)algo_seen;
  if (!cfg.preset.empty()) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), cfg.preset) == names.end()) {
      throw ConfigError("unknown preset '" + cfg.preset + "'");
    }
    for (const std::string& key : seen) {
      if (!kPresetCompatibleKeys.contains(key)) {
        throw ConfigError("key '" + key + "' cannot be combined with a preset");
      }
    }
    if (cfg.trace_stride < 1) throw ConfigError("stride must be >= 1");
  } else {
    validate_explicit(cfg);
  }
  return cfg;
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  if (!cfg.preset.empty()) {
    out << "preset=" << cfg.preset << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "out=" << cfg.out_dir << "\n";
    out << "stride=" << cfg.trace_stride << "\n";
    if (cfg.T >= 0) out << "T=" << cfg.T << "\n";
    if (cfg.gd_T >= 0) out << "gd_T=" << cfg.gd_T << "\n";
    return out.str();
  }
  out << "seed=" << cfg.seed << "\n";
  out << "out=" << cfg.out_dir << "\n";
  out << "stride=" << cfg.trace_stride << "\n";
  out << "m=" << cfg.m << "\n";
  out << "r=" << cfg.r << "\n";
  out << "r_a=" << cfg.r_A << "\n";
  out << "kappa=" << fmt_double(cfg.kappa) << "\n";
  out << "n=" << cfg.n << "\n";
  out << "population=" << (cfg.population ? "true" : "false") << "\n";
  out << "noise=" << fmt_double(cfg.noise_std) << "\n";
  out << "spectrum=" << spectrum_to_string(cfg.scheme) << "\n";
  out << "algo=" << (cfg.run_rgd && cfg.run_gd ? "both" : (cfg.run_rgd ? "rgd" : "gd")) << "\n";
  out << "eta=" << fmt_double(cfg.eta) << "\n";
  out << "mu=" << fmt_double(cfg.mu) << "\n";
  out << "T=" << cfg.T << "\n";
  out << "retraction=" << retraction_to_string(cfg.retraction) << "\n";
  out << "theta_init=" << fmt_double(cfg.theta_init_scale) << "\n";
  out << "gd_eta=" << fmt_double(cfg.gd_eta) << "\n";
  out << "gd_T=" << cfg.gd_T << "\n";
  out << "gd_init=" << fmt_double(cfg.gd_init_scale) << "\n";
  return out.str();
}

std::uint64_t memory_cap_bytes() {
  const char* env = std::getenv("WNMS_MEM_CAP_MB");
  std::uint64_t mb = 2048;
  if (env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || parsed == 0) {
      throw ConfigError("WNMS_MEM_CAP_MB must be a positive integer, got '" + std::string(env) +
                        "'");
    }
    mb = parsed;
  }
  return mb * 1024ull * 1024ull;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

struct SolveJob {
  std::string name;
  bool is_gd = false;
  Index r = 0;  // Stiefel factor rank for RGD jobs
  SolverConfig wn;
  GdConfig gd;
  std::shared_ptr<const MeasurementEnsemble> ens;
  std::shared_ptr<const Observations> obs;
  std::shared_ptr<const GroundTruth> truth;
  bool emit_recon_image = false;
  bool lift_readout = false;
};

struct PresetPlan {
  std::vector<SolveJob> jobs;
  std::shared_ptr<const GroundTruth> image_truth;  // truth PGM emitted when set
  std::shared_ptr<const Vector> lift_source;       // 16x16 source, also its PGM
  Index lift_side = 0;
};

// Seed block for one data group (shared by all runs on the same instance).
struct GroupSeeds {
  std::uint64_t truth;
  std::uint64_t ensemble;
  std::uint64_t labels;
  std::uint64_t init;
};

GroupSeeds group_seeds(const Rng& master, std::uint64_t group) {
  Rng g = master.split(group);
  return {g.split(0).next_u64(), g.split(1).next_u64(), g.split(2).next_u64(),
          g.split(3).next_u64()};
}

std::shared_ptr<const MeasurementEnsemble> tracked_dense(Index m, long n, std::uint64_t seed,
                                                         std::uint64_t& used_bytes) {
  const std::uint64_t bytes = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(m) *
                              static_cast<std::uint64_t>(m) * sizeof(double);
  const std::uint64_t cap = memory_cap_bytes();
  if (used_bytes + bytes > cap) {
    throw ConfigError("dense ensemble of n*m^2 doubles needs " + std::to_string(bytes) +
                      " bytes (" + std::to_string(used_bytes) + " already planned), over the cap of " +
                      std::to_string(cap) + " bytes");
  }
  used_bytes += bytes;
  return std::make_shared<const MeasurementEnsemble>(gen_gaussian_ensemble(m, n, seed));
}

long budget(long preset_default, long override_value) {
  return override_value >= 0 ? override_value : preset_default;
}

SolverConfig rgd_config(double eta, double mu, double theta_init, long T, std::uint64_t init_seed,
                        long stride, RetractionKind kind = RetractionKind::Polar) {
  SolverConfig cfg;
  cfg.eta = eta;
  cfg.mu = mu;
  cfg.T = T;
  cfg.retraction = kind;
  cfg.theta_init_scale = theta_init;
  cfg.rng_seed = init_seed;
  cfg.trace_stride = stride;
  return cfg;
}

GdConfig gd_config(Index r, double eta, double init_scale, long T, std::uint64_t init_seed,
                   long stride) {
  GdConfig cfg;
  cfg.r = r;
  cfg.eta = eta;
  cfg.T = T;
  cfg.init_scale = init_scale;
  cfg.rng_seed = init_seed;
  cfg.trace_stride = stride;
  return cfg;
}

// Deterministic 16x16 grayscale source for the lifted recovery preset: a
// centered blob over a gentle diagonal ramp, unit-normalized after
// row-major vectorization.
}  // namespace

Vector synthetic_source_image(Index side) {
  Matrix img(side, side);
  const double c = static_cast<double>(side - 1) / 2.0;
  for (Index i = 0; i < side; ++i) {
    for (Index j = 0; j < side; ++j) {
      const double dx = (static_cast<double>(i) - c) / (static_cast<double>(side) / 4.0);
      const double dy = (static_cast<double>(j) - c) / (static_cast<double>(side) / 4.0);
      img(i, j) = std::exp(-(dx * dx + dy * dy)) +
                  0.25 * static_cast<double>(i + j) / static_cast<double>(2 * side) +
                  0.15 * std::sin(6.0 * static_cast<double>(j) / static_cast<double>(side));
    }
  }
  Vector v(side * side);
  for (Index i = 0; i < side; ++i) {
    for (Index j = 0; j < side; ++j) v[i * side + j] = img(i, j);
  }
  return v / v.norm();
}

namespace {

PresetPlan plan_fig1(const ExperimentConfig& cfg) {
  PresetPlan plan;
  const Rng master(cfg.seed);
  const GroupSeeds seeds = group_seeds(master, 0);
  auto truth = std::make_shared<const GroundTruth>(
      make_ground_truth(60, 3, 3.0, SpectrumScheme::power_spaced(0.6), seeds.truth));
  auto ens = std::make_shared<const MeasurementEnsemble>(MeasurementEnsemble::population(60));
  auto obs = std::make_shared<const Observations>(Observations::population(truth->A));
  SolveJob job;
  job.name = "rgd";
  job.r = 6;
  job.wn = rgd_config(0.2, 2.0, 0.5, budget(6000, cfg.T), seeds.init, cfg.trace_stride);
  job.ens = ens;
  job.obs = obs;
  job.truth = truth;
  plan.jobs.push_back(std::move(job));
  return plan;
}

PresetPlan plan_fig2a(const ExperimentConfig& cfg) {
  PresetPlan plan;
  const Rng master(cfg.seed);
  std::uint64_t used = 0;
  const double kappas[] = {10.0, 20.0, 30.0};
  for (std::size_t i = 0; i < 3; ++i) {
    const GroupSeeds seeds = group_seeds(master, i);
    auto truth = std::make_shared<const GroundTruth>(
        make_ground_truth(10, 3, kappas[i], SpectrumScheme::log_spaced(), seeds.truth));
    auto ens = tracked_dense(10, 3000, seeds.ensemble, used);
    auto obs = std::make_shared<const Observations>(
        Observations::labels(gen_labels(*ens, *truth, 0.0, seeds.labels)));
    const std::string tag = "kappa" + std::to_string(static_cast<int>(kappas[i]));
    SolveJob rgd;
    rgd.name = "rgd_" + tag;
    rgd.r = 5;
    rgd.wn = rgd_config(0.1, 2.0, 1.0, budget(3000, cfg.T), seeds.init, cfg.trace_stride);
    rgd.ens = ens;
    rgd.obs = obs;
    rgd.truth = truth;
    plan.jobs.push_back(rgd);
    SolveJob gd;
    gd.name = "gd_" + tag;
    gd.is_gd = true;
    gd.gd = gd_config(5, 0.1, 0.1, budget(6000, cfg.gd_T), seeds.init, cfg.trace_stride);
    gd.ens = ens;
    gd.obs = obs;
    gd.truth = truth;
    plan.jobs.push_back(std::move(gd));
  }
  return plan;
}

PresetPlan plan_fig2b(const ExperimentConfig& cfg) {
  PresetPlan plan;
  const Rng master(cfg.seed);
  std::uint64_t used = 0;
  const Index ranks[] = {5, 10, 15};
  const double etas[] = {0.1, 0.12, 0.14};
  for (std::size_t i = 0; i < 3; ++i) {
    const GroupSeeds seeds = group_seeds(master, i);
    auto truth = std::make_shared<const GroundTruth>(
        make_ground_truth(20, 3, 10.0, SpectrumScheme::log_spaced(), seeds.truth));
    auto ens = tracked_dense(20, 3000, seeds.ensemble, used);
    auto obs = std::make_shared<const Observations>(
        Observations::labels(gen_labels(*ens, *truth, 0.0, seeds.labels)));
    const std::string tag = "r" + std::to_string(ranks[i]);
    SolveJob rgd;
    rgd.name = "rgd_" + tag;
    rgd.r = ranks[i];
    rgd.wn = rgd_config(etas[i], 2.0, 1.0, budget(4000, cfg.T), seeds.init, cfg.trace_stride);
    rgd.ens = ens;
    rgd.obs = obs;
    rgd.truth = truth;
    // the init seed fixes Z_0 given (m, r), so the paired GD shares it
    SolveJob gd;
    gd.name = "gd_" + tag;
    gd.is_gd = true;
    gd.gd = gd_config(ranks[i], etas[i], 0.1, budget(8000, cfg.gd_T), seeds.init,
                      cfg.trace_stride);
    gd.ens = ens;
    gd.obs = obs;
    gd.truth = truth;
    plan.jobs.push_back(std::move(rgd));
    plan.jobs.push_back(std::move(gd));
  }
  return plan;
}

PresetPlan plan_fig3a(const ExperimentConfig& cfg) {
  PresetPlan plan;
  const Rng master(cfg.seed);
  std::uint64_t used = 0;
  const GroupSeeds seeds = group_seeds(master, 0);
  auto truth = std::make_shared<const GroundTruth>(
      make_ground_truth(10, 3, 2.0, SpectrumScheme::log_spaced(), seeds.truth));
  auto ens = tracked_dense(10, 1000, seeds.ensemble, used);
  auto obs = std::make_shared<const Observations>(
      Observations::labels(gen_labels(*ens, *truth, 0.0, seeds.labels)));
  const RetractionKind kinds[] = {RetractionKind::Polar, RetractionKind::QR,
                                  RetractionKind::Cayley};
  const char* names[] = {"polar", "qr", "cayley"};
  for (int i = 0; i < 3; ++i) {
    SolveJob job;
    job.name = std::string("rgd_") + names[i];
    job.r = 5;
    job.wn = rgd_config(0.1, 2.0, 1.0, budget(800, cfg.T), seeds.init, cfg.trace_stride,
                        kinds[i]);
    job.ens = ens;
    job.obs = obs;
    job.truth = truth;
    plan.jobs.push_back(std::move(job));
  }
  return plan;
}

PresetPlan plan_fig3b(const ExperimentConfig& cfg) {
  PresetPlan plan;
  const Rng master(cfg.seed);
  std::uint64_t used = 0;
  const double xis[] = {1e-1, 1e-3, 1e-5};
  const char* tags[] = {"xi1e-1", "xi1e-3", "xi1e-5"};
  for (std::size_t i = 0; i < 3; ++i) {
    const GroupSeeds seeds = group_seeds(master, i);
    auto truth = std::make_shared<const GroundTruth>(
        make_ground_truth(10, 3, 2.0, SpectrumScheme::log_spaced(), seeds.truth));
    auto ens = tracked_dense(10, 1000, seeds.ensemble, used);
    auto obs = std::make_shared<const Observations>(
        Observations::labels(gen_labels(*ens, *truth, xis[i], seeds.labels)));
    SolveJob rgd;
    rgd.name = std::string("rgd_") + tags[i];
    rgd.r = 5;
    rgd.wn = rgd_config(0.1, 2.0, 1.0, budget(6000, cfg.T), seeds.init, cfg.trace_stride);
    rgd.ens = ens;
    rgd.obs = obs;
    rgd.truth = truth;
    plan.jobs.push_back(rgd);
    SolveJob gd;
    gd.name = std::string("gd_") + tags[i];
    gd.is_gd = true;
    gd.gd = gd_config(5, 0.1, 0.1, budget(12000, cfg.gd_T), seeds.init, cfg.trace_stride);
    gd.ens = ens;
    gd.obs = obs;
    gd.truth = truth;
    plan.jobs.push_back(std::move(gd));
  }
  return plan;
}

PresetPlan plan_fig3c(const ExperimentConfig& cfg) {
  PresetPlan plan;
  const Rng master(cfg.seed);
  std::uint64_t used = 0;
  const Index ms[] = {5, 25, 50};
  const Index ranks_a[] = {2, 10, 20};
  const double kappas[] = {1.0, 15.0, 50.0};
  for (std::size_t i = 0; i < 3; ++i) {
    const GroupSeeds seeds = group_seeds(master, i);
    auto truth = std::make_shared<const GroundTruth>(
        make_ground_truth(ms[i], ranks_a[i], kappas[i], SpectrumScheme::log_spaced(),
                          seeds.truth));
    auto ens = tracked_dense(ms[i], 5000, seeds.ensemble, used);
    auto obs = std::make_shared<const Observations>(
        Observations::labels(gen_labels(*ens, *truth, 0.0, seeds.labels)));
    const std::string tag = "m" + std::to_string(ms[i]);
    SolveJob full;
    full.name = "rgd_" + tag + "_rfull";
    full.r = ms[i];
    full.wn = rgd_config(0.1, 2.0, 1.0, budget(3000, cfg.T), seeds.init, cfg.trace_stride);
    full.ens = ens;
    full.obs = obs;
    full.truth = truth;
    plan.jobs.push_back(full);
    SolveJob nearfull;
    nearfull.name = "rgd_" + tag + "_rm2";
    nearfull.r = ms[i] - 2;
    nearfull.wn = rgd_config(0.1, 2.0, 1.0, budget(3000, cfg.T), seeds.init, cfg.trace_stride);
    nearfull.ens = ens;
    nearfull.obs = obs;
    nearfull.truth = truth;
    plan.jobs.push_back(std::move(nearfull));
  }
  return plan;
}

PresetPlan plan_img_blockwave(const ExperimentConfig& cfg) {
  PresetPlan plan;
  const Rng master(cfg.seed);
  std::uint64_t used = 0;
  const GroupSeeds seeds = group_seeds(master, 0);
  auto truth = std::make_shared<const GroundTruth>(make_blockwave_image(64, 2, seeds.truth));
  auto ens = tracked_dense(64, 20000, seeds.ensemble, used);
  auto obs = std::make_shared<const Observations>(
      Observations::labels(gen_labels(*ens, *truth, 0.0, seeds.labels)));
  plan.image_truth = truth;
  SolveJob rgd;
  rgd.name = "rgd";
  rgd.r = 20;
  rgd.wn = rgd_config(0.03, 2.0, 1.0, budget(100, cfg.T), seeds.init, cfg.trace_stride);
  rgd.ens = ens;
  rgd.obs = obs;
  rgd.truth = truth;
  rgd.emit_recon_image = true;
  plan.jobs.push_back(rgd);
  SolveJob gd;
  gd.name = "gd";
  gd.is_gd = true;
  gd.gd = gd_config(20, 0.03, 0.1, budget(200, cfg.gd_T), seeds.init, cfg.trace_stride);
  gd.ens = ens;
  gd.obs = obs;
  gd.truth = truth;
  gd.emit_recon_image = true;
  plan.jobs.push_back(std::move(gd));
  return plan;
}

PresetPlan plan_img_lift(const ExperimentConfig& cfg) {
  PresetPlan plan;
  const Rng master(cfg.seed);
  std::uint64_t used = 0;
  const GroupSeeds seeds = group_seeds(master, 0);
  plan.lift_side = 16;
  auto source = std::make_shared<const Vector>(synthetic_source_image(plan.lift_side));
  auto truth = std::make_shared<const GroundTruth>(lift_vector(*source));
  auto ens = tracked_dense(256, 3000, seeds.ensemble, used);
  auto obs = std::make_shared<const Observations>(
      Observations::labels(gen_labels(*ens, *truth, 0.0, seeds.labels)));
  plan.lift_source = source;
  plan.image_truth = truth;
  SolveJob rgd;
  rgd.name = "rgd";
  rgd.r = 24;
  rgd.wn = rgd_config(0.01, 2.0, 1.0, budget(100, cfg.T), seeds.init, cfg.trace_stride);
  rgd.ens = ens;
  rgd.obs = obs;
  rgd.truth = truth;
  rgd.emit_recon_image = true;
  rgd.lift_readout = true;
  plan.jobs.push_back(rgd);
  SolveJob gd;
  gd.name = "gd";
  gd.is_gd = true;
  gd.gd = gd_config(24, 0.01, 0.1, budget(200, cfg.gd_T), seeds.init, cfg.trace_stride);
  gd.ens = ens;
  gd.obs = obs;
  gd.truth = truth;
  gd.emit_recon_image = true;
  gd.lift_readout = true;
  plan.jobs.push_back(std::move(gd));
  return plan;
}

PresetPlan plan_custom(const ExperimentConfig& cfg) {
  PresetPlan plan;
  const Rng master(cfg.seed);
  std::uint64_t used = 0;
  const GroupSeeds seeds = group_seeds(master, 0);
  auto truth = std::make_shared<const GroundTruth>(
      make_ground_truth(cfg.m, cfg.r_A, cfg.kappa, cfg.scheme, seeds.truth));
  std::shared_ptr<const MeasurementEnsemble> ens;
  std::shared_ptr<const Observations> obs;
  if (cfg.population) {
    ens = std::make_shared<const MeasurementEnsemble>(MeasurementEnsemble::population(cfg.m));
    obs = std::make_shared<const Observations>(Observations::population(truth->A));
  } else {
    ens = tracked_dense(cfg.m, cfg.n, seeds.ensemble, used);
    obs = std::make_shared<const Observations>(
        Observations::labels(gen_labels(*ens, *truth, cfg.noise_std, seeds.labels)));
  }
  if (cfg.run_rgd) {
    SolveJob job;
    job.name = "rgd";
    job.r = cfg.r;
    job.wn = rgd_config(cfg.eta, cfg.mu, cfg.theta_init_scale, cfg.T, seeds.init,
                        cfg.trace_stride, cfg.retraction);
    job.ens = ens;
    job.obs = obs;
    job.truth = truth;
    plan.jobs.push_back(std::move(job));
  }
  if (cfg.run_gd) {
    SolveJob job;
    job.name = "gd";
    job.is_gd = true;
    job.gd = gd_config(cfg.r, cfg.gd_eta, cfg.gd_init_scale, cfg.gd_T, seeds.init,
                       cfg.trace_stride);
    job.ens = ens;
    job.obs = obs;
    job.truth = truth;
    plan.jobs.push_back(std::move(job));
  }
  return plan;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "img-blockwave", "img-lift"};
}

Vector rank_one_readout(const Matrix& z) {
  const SvdResult svd = compact_svd(z, 1);
  return svd.left.col(0) * std::sqrt(std::max(0.0, svd.singulars[0]));
}

RunManifest run_preset(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();

  PresetPlan plan;
  if (config.preset.empty()) {
    validate_explicit(config);
    plan = plan_custom(config);
  } else if (config.preset == "fig1") {
    plan = plan_fig1(config);
  } else if (config.preset == "fig2a") {
    plan = plan_fig2a(config);
  } else if (config.preset == "fig2b") {
    plan = plan_fig2b(config);
  } else if (config.preset == "fig3a") {
    plan = plan_fig3a(config);
  } else if (config.preset == "fig3b") {
    plan = plan_fig3b(config);
  } else if (config.preset == "fig3c") {
    plan = plan_fig3c(config);
  } else if (config.preset == "img-blockwave") {
    plan = plan_img_blockwave(config);
  } else if (config.preset == "img-lift") {
    plan = plan_img_lift(config);
  } else {
    throw ConfigError("unknown preset '" + config.preset + "'");
  }

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.out_dir);

  const std::string prefix = config.preset.empty() ? "custom" : config.preset;
  RunManifest manifest;
  manifest.config = config;

  if (plan.image_truth) {
    const std::string truth_file = prefix + "_truth.pgm";
    if (plan.lift_source) {
      Matrix img(plan.lift_side, plan.lift_side);
      for (Index i = 0; i < plan.lift_side; ++i) {
        for (Index j = 0; j < plan.lift_side; ++j) img(i, j) = (*plan.lift_source)[i * plan.lift_side + j];
      }
      emit_pgm(img, config.out_dir + "/" + truth_file);
    } else {
      emit_pgm(plan.image_truth->A, config.out_dir + "/" + truth_file);
    }
    RunSummary truth_entry;
    truth_entry.name = "truth";
    truth_entry.image_files.push_back(truth_file);
    manifest.runs.push_back(std::move(truth_entry));
  }

  for (const SolveJob& job : plan.jobs) {
    RunSummary summary;
    summary.name = job.name;
    Trace trace;
    Matrix recon;
    if (job.is_gd) {
      trace = gd_run(job.gd, *job.ens, *job.obs, job.truth.get());
      recon = trace.back().X * trace.back().X.transpose();
    } else {
      const WnState init = init_random(job.truth->m, job.r, job.wn.theta_init_scale, job.wn.rng_seed);
      trace = run(init, *job.ens, *job.obs, job.wn, job.truth.get());
      recon = trace.back().X * trace.back().Theta * trace.back().X.transpose();
    }

    const std::string trace_file = prefix + "_" + job.name + ".csv";
    emit_csv(trace, config.out_dir + "/" + trace_file);
    summary.trace_file = trace_file;
    summary.final_sq_error = trace.back().sq_recon_error;
    for (const TraceRecord& rec : trace) {
      if (summary.iters_to_1e6 < 0 && rec.sq_recon_error <= 1e-6) summary.iters_to_1e6 = rec.t;
      if (summary.iters_to_1e10 < 0 && rec.sq_recon_error <= 1e-10) summary.iters_to_1e10 = rec.t;
    }
    if (job.ens->mode() == EnsembleMode::Dense) summary.ensemble_checksum = job.ens->checksum();

    if (job.emit_recon_image) {
      if (job.lift_readout && plan.lift_source) {
        const Vector readout = rank_one_readout(recon);
        const Vector& source = *plan.lift_source;
        summary.lift_rel_error =
            std::min((readout - source).norm(), (readout + source).norm()) / source.norm();
        const Vector shown = (readout - source).norm() <= (readout + source).norm()
                                 ? readout
                                 : Vector(-readout);
        Matrix img(plan.lift_side, plan.lift_side);
        for (Index i = 0; i < plan.lift_side; ++i) {
          for (Index j = 0; j < plan.lift_side; ++j) img(i, j) = shown[i * plan.lift_side + j];
        }
        const std::string img_file = prefix + "_" + job.name + "_recon.pgm";
        emit_pgm(img, config.out_dir + "/" + img_file);
        summary.image_files.push_back(img_file);
      } else {
        const std::string img_file = prefix + "_" + job.name + "_recon.pgm";
        emit_pgm(recon, config.out_dir + "/" + img_file);
        summary.image_files.push_back(img_file);
      }
    }
    manifest.runs.push_back(std::move(summary));
  }

  manifest.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest.manifest_file = prefix + "_manifest.txt";

  std::ofstream out(config.out_dir + "/" + manifest.manifest_file);
  if (!out) throw IoError("cannot write manifest in " + config.out_dir);
  out << "wall_clock_sec=" << fmt_double(manifest.wall_clock_sec) << "\n";
  std::istringstream cfg_lines(emit_config(config));
  std::string line;
  while (std::getline(cfg_lines, line)) out << "cfg." << line << "\n";
  for (std::size_t i = 0; i < manifest.runs.size(); ++i) {
    const RunSummary& s = manifest.runs[i];
    const std::string key = "run." + std::to_string(i) + ".";
    out << key << "name=" << s.name << "\n";
    if (!s.trace_file.empty()) {
      out << key << "trace=" << s.trace_file << "\n";
      out << key << "final_sq_error=" << fmt_double(s.final_sq_error) << "\n";
      out << key << "iters_to_1e-06=" << s.iters_to_1e6 << "\n";
      out << key << "iters_to_1e-10=" << s.iters_to_1e10 << "\n";
      char hex[20];
      std::snprintf(hex, sizeof hex, "%016llx",
                    static_cast<unsigned long long>(s.ensemble_checksum));
      out << key << "ensemble_checksum=" << hex << "\n";
      if (s.lift_rel_error >= 0.0) {
        out << key << "lift_rel_error=" << fmt_double(s.lift_rel_error) << "\n";
      }
    }
    for (std::size_t k = 0; k < s.image_files.size(); ++k) {
      out << key << "image." << k << "=" << s.image_files[k] << "\n";
    }
  }
  if (!out) throw IoError("manifest write failed in " + config.out_dir);
  return manifest;
}

// ---------------------------------------------------------------------------
// CSV

void emit_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_csv: cannot open " + path);

  bool has_recon = false, has_theta = false, has_align = false;
  Index n_phi = 0, n_theta = 0, n_sd = 0;
  if (!trace.empty()) {
    const TraceRecord& f = trace.front();
    has_recon = !std::isnan(f.recon_error);
    has_theta = f.theta_singulars.size() > 0;
    has_align = f.saddle_dists.size() > 0;
    n_phi = f.phi_singulars.size();
    n_theta = f.theta_singulars.size();
    n_sd = f.saddle_dists.size();
  }

  out << "t";
  if (has_recon) out << ",recon_error,sq_recon_error";
  out << ",objective,grad_norm_X";
  if (has_theta) out << ",grad_norm_Theta";
  if (has_align) out << ",trace_phi,align_error,trace_psi";
  for (Index i = 0; i < n_phi; ++i) out << ",phi_s" << (i + 1);
  for (Index i = 0; i < n_theta; ++i) out << ",th_s" << (i + 1);
  for (Index i = 0; i < n_sd; ++i) out << ",sd_" << i;
  out << "\n";

  for (const TraceRecord& rec : trace) {
    out << rec.t;
    if (has_recon) out << "," << fmt_double(rec.recon_error) << "," << fmt_double(rec.sq_recon_error);
    out << "," << fmt_double(rec.objective) << "," << fmt_double(rec.grad_norm_X);
    if (has_theta) out << "," << fmt_double(rec.grad_norm_Theta);
    if (has_align) {
      out << "," << fmt_double(rec.trace_phi) << "," << fmt_double(rec.align_error) << ","
          << fmt_double(rec.trace_psi);
    }
    for (Index i = 0; i < n_phi; ++i) out << "," << fmt_double(rec.phi_singulars[i]);
    for (Index i = 0; i < n_theta; ++i) out << "," << fmt_double(rec.theta_singulars[i]);
    for (Index i = 0; i < n_sd; ++i) out << "," << fmt_double(rec.saddle_dists[i]);
    out << "\n";
  }
  if (!out) throw IoError("emit_csv: write failed for " + path);
}

CsvTable parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("parse_csv: cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("parse_csv: missing header in " + path);
  std::istringstream head(line);
  std::string cell;
  while (std::getline(head, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    while (std::getline(fields, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw IoError("parse_csv: bad number '" + cell + "' in " + path);
      }
      row.push_back(v);
    }
    if (row.size() != table.header.size()) {
      throw IoError("parse_csv: ragged row in " + path);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace wnms

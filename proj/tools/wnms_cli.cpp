#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "wnms/harness.hpp"
#include "wnms/sensing.hpp"
#include "wnms/wn_solver.hpp"

namespace {

int do_run(const std::string& config_path, const std::string& preset, std::uint64_t seed,
           bool seed_set, const std::string& out_dir) {
  wnms::ExperimentConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw wnms::IoError("cannot open config file " + config_path);
    std::ostringstream text;
    text << in.rdbuf();
    config = wnms::parse_config(text.str());
  } else {
    std::ostringstream text;
    text << "preset=" << preset << "\n";
    config = wnms::parse_config(text.str());
  }
  if (seed_set) config.seed = seed;
  if (!out_dir.empty()) config.out_dir = out_dir;

  const wnms::RunManifest manifest = wnms::run_preset(config);
  std::cout << "wrote " << config.out_dir << "/" << manifest.manifest_file << " ("
            << manifest.runs.size() << " entries, " << manifest.wall_clock_sec << " s)\n";
  for (const wnms::RunSummary& run : manifest.runs) {
    if (run.trace_file.empty()) continue;
    std::cout << "  " << run.name << ": final squared error " << run.final_sq_error;
    if (run.lift_rel_error >= 0.0) std::cout << ", readout error " << run.lift_rel_error;
    std::cout << "\n";
  }
  return 0;
}

int do_rip_check(long m, long n, long rank, long trials, std::uint64_t seed) {
  const wnms::MeasurementEnsemble ens =
      wnms::gen_gaussian_ensemble(m, n, wnms::Rng(seed).split(1).next_u64());
  const wnms::RipEstimate est = wnms::rip_estimate(ens, rank, trials, seed);
  std::cout << "m=" << m << " n=" << n << " rank=" << rank << " trials=" << trials
            << " seed=" << seed << "\n";
  std::cout << "delta_hat=" << est.delta_hat << " (sampled lower bound on delta)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weight-normalized matrix sensing toolkit"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "execute an experiment preset or config file");
  std::string config_path, preset, out_dir;
  std::uint64_t seed = 0;
  auto* config_opt = run_cmd->add_option("--config", config_path, "key=value config file");
  auto* preset_opt = run_cmd->add_option("--preset", preset, "preset name (see list-presets)");
  config_opt->excludes(preset_opt);
  auto* seed_opt = run_cmd->add_option("--seed", seed, "master seed override");
  run_cmd->add_option("--out", out_dir, "output directory override");

  auto* list_cmd = app.add_subcommand("list-presets", "print available preset names");

  auto* rip_cmd = app.add_subcommand("rip-check", "estimate a lower bound on the RIP constant");
  long rip_m = 8, rip_n = 4000, rip_rank = 6, rip_trials = 200;
  std::uint64_t rip_seed = 1;
  rip_cmd->add_option("--m", rip_m, "matrix dimension")->required();
  rip_cmd->add_option("--n", rip_n, "number of measurements")->required();
  rip_cmd->add_option("--rank", rip_rank, "rank of the test matrices")->required();
  rip_cmd->add_option("--trials", rip_trials, "number of random test matrices");
  rip_cmd->add_option("--seed", rip_seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const std::string& name : wnms::preset_names()) std::cout << name << "\n";
      return 0;
    }
    if (rip_cmd->parsed()) {
      return do_rip_check(rip_m, rip_n, rip_rank, rip_trials, rip_seed);
    }
    if (config_path.empty() && preset.empty()) {
      throw wnms::ConfigError("run: provide --config or --preset");
    }
    return do_run(config_path, preset, seed, seed_opt->count() > 0, out_dir);
  } catch (const wnms::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 2;
  } catch (const wnms::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

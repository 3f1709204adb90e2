#include "wnms/baseline_gd.hpp"

#include <cmath>
#include <stdexcept>

#include "wnms/wn_solver.hpp"

namespace wnms {

namespace {

constexpr double kDivergenceCap = 1e12;

}  // namespace

Matrix gd_grad(const GdState& state, const MeasurementEnsemble& ens, const Observations& obs) {
  if (state.Y.rows() != ens.m()) {
    throw std::invalid_argument("gd_grad: factor row count does not match the ensemble dimension");
  }
  const Matrix z = state.Y * state.Y.transpose();
  return sensed_residual(ens, z, obs) * state.Y;
}

Trace gd_run(const GdConfig& config, const MeasurementEnsemble& ens, const Observations& obs,
             const GroundTruth* truth) {
  if (config.r < 1) throw std::invalid_argument("GdConfig: r must be positive");
  if (!(config.eta > 0.0)) throw std::invalid_argument("GdConfig: eta must be positive");
  if (config.T < 0) throw std::invalid_argument("GdConfig: T must be >= 0");
  if (config.trace_stride < 1) throw std::invalid_argument("GdConfig: trace_stride must be >= 1");

  GdState state;
  state.Y = config.init_scale * random_gaussian(ens.m(), config.r, config.rng_seed);
  state.t = 0;

  Trace trace;
  for (long it = 0;; ++it) {
    const Matrix z = state.Y * state.Y.transpose();
    const ResidualEval ev = eval_residual(ens, z, obs);
    if (!std::isfinite(ev.objective) || ev.objective > kDivergenceCap) {
      throw DivergenceError(it, ev.objective);
    }
    const Matrix g = ev.residual * state.Y;

    double sq = TraceRecord::kUnset;
    if (truth != nullptr) sq = (z - truth->A).squaredNorm();
    const bool stopping = config.stop_sq_error >= 0.0 && truth != nullptr &&
                          sq <= config.stop_sq_error;
    const bool last = it == config.T || stopping;
    if (last || it % config.trace_stride == 0) {
      TraceRecord rec;
      rec.t = state.t;
      rec.objective = ev.objective;
      rec.grad_norm_X = g.norm();
      if (truth != nullptr) {
        rec.sq_recon_error = sq;
        rec.recon_error = std::sqrt(sq);
      }
      trace.push_back(std::move(rec));
    }
    if (last) break;

    state.Y -= config.eta * g;
    state.t += 1;
  }
  trace.back().X = state.Y;  // the factor lives in the X slot for GD traces
  return trace;
}

}  // namespace wnms

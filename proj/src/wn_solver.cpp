#include "wnms/wn_solver.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "wnms/diagnostics.hpp"

namespace wnms {

namespace {

constexpr double kDivergenceCap = 1e12;

void check_solver_config(const SolverConfig& config) {
  if (!(config.eta > 0.0)) throw std::invalid_argument("SolverConfig: eta must be positive");
  if (!(config.mu > 0.0)) throw std::invalid_argument("SolverConfig: mu must be positive");
  if (config.T < 0) throw std::invalid_argument("SolverConfig: T must be >= 0");
  if (config.trace_stride < 1) throw std::invalid_argument("SolverConfig: trace_stride must be >= 1");
}

Vector descending_singulars(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues();
}

}  // namespace

DivergenceError::DivergenceError(long iteration, double value)
    : std::runtime_error("objective diverged at iteration " + std::to_string(iteration) +
                         " (value " + std::to_string(value) + ")"),
      iteration_(iteration) {}

Matrix euclidean_grad_X(const WnState& state, const MeasurementEnsemble& ens,
                        const Observations& obs) {
  const Matrix z = state.X * state.Theta * state.X.transpose();
  return sensed_residual(ens, z, obs) * (state.X * state.Theta);
}

Matrix riemannian_grad_X(const WnState& state, const Matrix& gtilde) {
  if (gtilde.rows() != state.X.rows() || gtilde.cols() != state.X.cols()) {
    throw std::invalid_argument("riemannian_grad_X: gradient shape does not match X");
  }
  const Matrix xtg = state.X.transpose() * gtilde;
  return gtilde - 0.5 * state.X * (xtg + xtg.transpose());
}

Matrix retract(const Matrix& x, const Matrix& g, double eta, RetractionKind kind) {
  if (g.rows() != x.rows() || g.cols() != x.cols()) {
    throw std::invalid_argument("retract: direction shape does not match X");
  }
  const Matrix xtg = x.transpose() * g;
  if ((xtg + xtg.transpose()).norm() > 1e-8 * (1.0 + g.norm())) {
    throw std::invalid_argument("retract: direction is not tangent at X");
  }
  const Index r = x.cols();
  switch (kind) {
    case RetractionKind::Polar: {
      const Matrix y = x - eta * g;
      return y * inv_sqrt_psd(Matrix::Identity(r, r) + (eta * eta) * (g.transpose() * g));
    }
    case RetractionKind::QR: {
      return qr_positive(x - eta * g).first;
    }
    case RetractionKind::Cayley: {
      // Wen-Yin form: W = Ghat X^T - X Ghat^T with Ghat = G - (1/2) X X^T G,
      // which makes the curve X(eta) match X - eta G to first order.
      const Matrix ghat = g - 0.5 * x * xtg;
      const Matrix half = ghat * x.transpose();
      const Matrix w = half - half.transpose();
      const Index m = x.rows();
      const Matrix lhs = Matrix::Identity(m, m) + (0.5 * eta) * w;
      Eigen::FullPivLU<Matrix> lu(lhs);
      if (!lu.isInvertible()) {
        throw std::runtime_error("retract: singular Cayley system");
      }
      return lu.solve((Matrix::Identity(m, m) - (0.5 * eta) * w) * x);
    }
  }
  throw std::logic_error("retract: unknown retraction kind");
}

Matrix grad_Theta(const Matrix& x_next, const Matrix& theta, const MeasurementEnsemble& ens,
                  const Observations& obs) {
  if (theta.rows() != theta.cols() || theta.rows() != x_next.cols()) {
    throw std::invalid_argument("grad_Theta: Theta must be r x r with r = cols(X)");
  }
  const Matrix z = x_next * theta * x_next.transpose();
  return 0.5 * x_next.transpose() * sensed_residual(ens, z, obs) * x_next;
}

WnState step(const WnState& state, const MeasurementEnsemble& ens, const Observations& obs,
             const SolverConfig& config) {
  const Matrix gtilde = euclidean_grad_X(state, ens, obs);
  const Matrix g = riemannian_grad_X(state, gtilde);
  WnState next;
  next.X = retract(state.X, g, config.eta, config.retraction);
  next.Theta = state.Theta - config.mu * grad_Theta(next.X, state.Theta, ens, obs);
  next.t = state.t + 1;
  return next;
}

WnState init_random(Index m, Index r, double theta_init_scale, std::uint64_t seed) {
  if (std::abs(theta_init_scale) > 2.0) {
    throw std::invalid_argument("init_random: |theta_init_scale| must be <= 2");
  }
  WnState state;
  state.X = random_stiefel(m, r, seed);
  state.Theta = theta_init_scale * Matrix::Identity(r, r);
  state.t = 0;
  return state;
}

Trace run(const WnState& init, const MeasurementEnsemble& ens, const Observations& obs,
          const SolverConfig& config, const GroundTruth* truth) {
  check_solver_config(config);
  std::unique_ptr<AlignmentBasis> basis;
  if (truth != nullptr) basis = std::make_unique<AlignmentBasis>(make_alignment_basis(*truth));

  WnState state = init;
  Trace trace;
  for (long it = 0;; ++it) {
    const Matrix z = state.X * state.Theta * state.X.transpose();
    const ResidualEval ev = eval_residual(ens, z, obs);
    if (!std::isfinite(ev.objective) || ev.objective > kDivergenceCap) {
      throw DivergenceError(it, ev.objective);
    }

    const Matrix gtilde = ev.residual * (state.X * state.Theta);
    const Matrix g = riemannian_grad_X(state, gtilde);

    const bool stopping =
        config.stop_sq_error >= 0.0 && truth != nullptr &&
        (z - truth->A).squaredNorm() <= config.stop_sq_error;
    const bool last = it == config.T || stopping;
    if (last || it % config.trace_stride == 0) {
      TraceRecord rec;
      rec.t = state.t;
      rec.objective = ev.objective;
      rec.grad_norm_X = g.norm();
      rec.grad_norm_Theta = (0.5 * state.X.transpose() * ev.residual * state.X).norm();
      rec.theta_singulars = descending_singulars(state.Theta);
      if (truth != nullptr) detail::fill_alignment(rec, state.X, z, *truth, *basis);
      trace.push_back(std::move(rec));
    }
    if (last) break;

    state.X = retract(state.X, g, config.eta, config.retraction);
    state.Theta -= config.mu * grad_Theta(state.X, state.Theta, ens, obs);
    state.t += 1;
  }
  trace.back().X = state.X;
  trace.back().Theta = state.Theta;
  return trace;
}

double theoretical_eta(Index m, Index r, Index r_A, double kappa) {
  if (r <= r_A) throw std::invalid_argument("theoretical_eta: requires r > r_A");
  const double gap = static_cast<double>(r - r_A);
  return std::pow(gap, 4) /
         (kappa * kappa * static_cast<double>(m * m) * static_cast<double>(r * r) *
          static_cast<double>(r_A));
}

}  // namespace wnms

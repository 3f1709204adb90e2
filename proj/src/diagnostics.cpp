#include "wnms/diagnostics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wnms {

namespace detail {

void fill_alignment(TraceRecord& rec, const Matrix& x, const Matrix& z, const GroundTruth& truth,
                    const AlignmentBasis& basis) {
  rec.sq_recon_error = (z - truth.A).squaredNorm();
  rec.recon_error = std::sqrt(rec.sq_recon_error);
  const Matrix phi = basis.U.transpose() * x;
  const Matrix psi = basis.U_perp.transpose() * x;
  rec.trace_phi = phi.squaredNorm();
  rec.align_error = static_cast<double>(truth.r_A) - rec.trace_phi;
  rec.trace_psi = psi.squaredNorm();
  const Matrix pp_raw = phi * phi.transpose();
  const Matrix pp = 0.5 * (pp_raw + pp_raw.transpose());
  rec.phi_singulars = sym_eigendecompose(pp).eigenvalues;
  rec.saddle_dists.resize(truth.r_A);
  for (Index rho = 0; rho < truth.r_A; ++rho) {
    rec.saddle_dists[rho] = (z - best_rank_rho(truth, rho)).squaredNorm();
  }
}

}  // namespace detail

AlignmentBasis make_alignment_basis(const GroundTruth& truth, std::uint64_t seed) {
  AlignmentBasis basis;
  basis.U = truth.U;
  const Index m = truth.m;
  const Index rest = m - truth.r_A;
  if (rest == 0) {
    basis.U_perp = Matrix(m, 0);
    return basis;
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < 5; ++attempt) {
    Matrix cat(m, m);
    cat.leftCols(truth.r_A) = truth.U;
    cat.rightCols(rest) = random_gaussian(m, rest, rng);
    try {
      basis.U_perp = qr_positive(cat).first.rightCols(rest);
      return basis;
    } catch (const std::invalid_argument&) {
      continue;  // degenerate completion, redraw
    }
  }
  throw std::runtime_error("make_alignment_basis: could not complete an orthogonal basis");
}

TraceRecord measure(const WnState& state, const GroundTruth& truth, const AlignmentBasis& basis,
                    const MeasurementEnsemble& ens, const Observations& obs) {
  TraceRecord rec;
  rec.t = state.t;
  const Matrix z = state.X * state.Theta * state.X.transpose();
  const ResidualEval ev = eval_residual(ens, z, obs);
  rec.objective = ev.objective;
  rec.grad_norm_X = riemannian_grad_X(state, ev.residual * (state.X * state.Theta)).norm();
  rec.grad_norm_Theta = (0.5 * state.X.transpose() * ev.residual * state.X).norm();
  rec.theta_singulars = Eigen::JacobiSVD<Matrix>(state.Theta).singularValues();
  detail::fill_alignment(rec, state.X, z, truth, basis);
  return rec;
}

TraceRecord measure_gd(const GdState& state, const GroundTruth& truth,
                       const MeasurementEnsemble& ens, const Observations& obs) {
  TraceRecord rec;
  rec.t = state.t;
  const Matrix z = state.Y * state.Y.transpose();
  const ResidualEval ev = eval_residual(ens, z, obs);
  rec.objective = ev.objective;
  rec.grad_norm_X = (ev.residual * state.Y).norm();
  rec.sq_recon_error = (z - truth.A).squaredNorm();
  rec.recon_error = std::sqrt(rec.sq_recon_error);
  return rec;
}

WnState build_population_saddle(const GroundTruth& truth, Index r, Index rho,
                                std::uint64_t seed) {
  if (rho < 0 || rho > truth.r_A - 1) {
    throw std::invalid_argument("build_population_saddle: rho must lie in [0, r_A - 1]");
  }
  if (r < 1 || rho > r) {
    throw std::invalid_argument("build_population_saddle: need rho <= r");
  }
  if (r - rho > truth.m - truth.r_A) {
    throw std::invalid_argument(
        "build_population_saddle: no room for " + std::to_string(r - rho) +
        " complement columns in dimension " + std::to_string(truth.m - truth.r_A));
  }
  Rng rng(seed);
  const AlignmentBasis basis = make_alignment_basis(truth, rng.split(0).next_u64());
  Rng draw = rng.split(1);
  WnState state;
  state.X.resize(truth.m, r);
  state.X.leftCols(rho) = truth.U.leftCols(rho);
  if (r - rho > 0) {
    const Matrix coeff = random_stiefel(truth.m - truth.r_A, r - rho, draw);
    state.X.rightCols(r - rho) = basis.U_perp * coeff;
  }
  state.Theta = Matrix::Zero(r, r);
  for (Index j = 0; j < rho; ++j) state.Theta(j, j) = truth.sigma[j];
  state.t = 0;
  return state;
}

std::pair<double, double> saddle_gradient_gap(const WnState& state,
                                              const MeasurementEnsemble& ens,
                                              const Observations& obs,
                                              const GroundTruth& truth) {
  if (ens.mode() == EnsembleMode::Population) return {0.0, 0.0};
  const Matrix z = state.X * state.Theta * state.X.transpose();
  const Matrix xtheta = state.X * state.Theta;

  const Matrix s_finite = sensed_residual(ens, z, obs);
  const Matrix g_finite = riemannian_grad_X(state, s_finite * xtheta);
  const Matrix k_finite = 0.5 * state.X.transpose() * s_finite * state.X;

  const Matrix s_pop = z - truth.A;
  const Matrix g_pop = riemannian_grad_X(state, s_pop * xtheta);
  const Matrix k_pop = 0.5 * state.X.transpose() * s_pop * state.X;

  return {(g_finite - g_pop).norm(), (k_finite - k_pop).norm()};
}

std::vector<Plateau> detect_plateaus(const Trace& trace, double rel_tol, long min_len) {
  if (trace.empty()) throw std::invalid_argument("detect_plateaus: trace must be nonempty");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("detect_plateaus: rel_tol must be positive");
  if (min_len < 2) throw std::invalid_argument("detect_plateaus: min_len must be >= 2");

  const long n = static_cast<long>(trace.size());
  const auto flat = [&](long i) {
    const double a = trace[static_cast<std::size_t>(i)].sq_recon_error;
    const double b = trace[static_cast<std::size_t>(i + 1)].sq_recon_error;
    return std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b));
  };

  std::vector<Plateau> out;
  long start = -1;
  for (long i = 0; i < n - 1; ++i) {
    if (flat(i)) {
      if (start < 0) start = i;
      continue;
    }
    if (start >= 0 && i - start + 1 >= min_len) out.push_back({start, i, -1});
    start = -1;
  }
  if (start >= 0 && n - start >= min_len) out.push_back({start, n - 1, -1});

  for (Plateau& p : out) {
    const TraceRecord& mid = trace[static_cast<std::size_t>((p.start + p.end) / 2)];
    if (mid.saddle_dists.size() > 0) {
      Index best = 0;
      for (Index rho = 1; rho < mid.saddle_dists.size(); ++rho) {
        if (mid.saddle_dists[rho] < mid.saddle_dists[best]) best = rho;
      }
      p.rho = best;
    }
  }
  return out;
}

}  // namespace wnms

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "wnms/baseline_gd.hpp"
#include "wnms/model.hpp"
#include "wnms/sensing.hpp"
#include "wnms/trace.hpp"
#include "wnms/wn_solver.hpp"

namespace wnms {

// [U, U_perp] is an orthogonal basis of R^m splitting the target column
// space from its complement; Phi = U^T X and Psi = U_perp^T X.
struct AlignmentBasis {
  Matrix U;       // m x r_A
  Matrix U_perp;  // m x (m - r_A)
};

inline constexpr std::uint64_t kDefaultBasisSeed = 0xa11b05eedULL;

AlignmentBasis make_alignment_basis(const GroundTruth& truth,
                                    std::uint64_t seed = kDefaultBasisSeed);

// All trajectory measurements for one iterate. The GD variant fills only the
// fields that exist without a Stiefel factor (errors, objective, gradient).
TraceRecord measure(const WnState& state, const GroundTruth& truth, const AlignmentBasis& basis,
                    const MeasurementEnsemble& ens, const Observations& obs);
TraceRecord measure_gd(const GdState& state, const GroundTruth& truth,
                       const MeasurementEnsemble& ens, const Observations& obs);

// Stationary point of the population loss with X Theta X^T = A_rho and
// Tr(X^T U U^T X) = rho: the leading rho target directions plus r - rho
// random orthonormal columns inside the complement of span(U).
WnState build_population_saddle(const GroundTruth& truth, Index r, Index rho, std::uint64_t seed);

// (|grad_X^R f_inf - grad_X^R f|_F, |grad_Theta f_inf - grad_Theta f|_F) at
// the given point; (0, 0) for a population ensemble.
std::pair<double, double> saddle_gradient_gap(const WnState& state, const MeasurementEnsemble& ens,
                                              const Observations& obs, const GroundTruth& truth);

struct Plateau {
  long start = 0;  // trace row indices, inclusive
  long end = 0;
  Index rho = -1;  // argmin of saddle_dists at the segment midpoint; -1 if unavailable
};

// Maximal runs of >= min_len rows whose squared reconstruction error moves by
// less than rel_tol per step (relative to the larger neighbor).
std::vector<Plateau> detect_plateaus(const Trace& trace, double rel_tol = 1e-4, long min_len = 10);

namespace detail {
// Shared by measure() and the solver loops: reconstruction error, alignment
// traces, singular tracks, and saddle distances for the iterate X with
// Z = X Theta X^T.
void fill_alignment(TraceRecord& rec, const Matrix& x, const Matrix& z, const GroundTruth& truth,
                    const AlignmentBasis& basis);
}  // namespace detail

}  // namespace wnms

#pragma once

#include <cstdint>

#include "wnms/matcore.hpp"

namespace wnms {

enum class SpectrumKind { LogSpaced, PowerSpaced };

// How the target spectrum interpolates between 1 and 1/kappa.
struct SpectrumScheme {
  SpectrumKind kind = SpectrumKind::LogSpaced;
  double p = 1.0;  // PowerSpaced exponent, in (0, 1]

  static SpectrumScheme log_spaced() { return {SpectrumKind::LogSpaced, 1.0}; }
  static SpectrumScheme power_spaced(double p) { return {SpectrumKind::PowerSpaced, p}; }

  friend bool operator==(const SpectrumScheme&, const SpectrumScheme&) = default;
};

// Rank-r_A PSD target A = U diag(sigma) U^T with sigma_1 = 1 and
// sigma_{r_A} = 1/kappa, except for lifted vectors where sigma_1 = |a|^2
// and the unit normalization is waived (flagged by `lifted`).
struct GroundTruth {
  Index m = 0;
  Index r_A = 0;
  double kappa = 1.0;
  Matrix U;      // m x r_A, orthonormal columns
  Vector sigma;  // positive, descending
  Matrix A;      // m x m
  bool lifted = false;
};

GroundTruth make_ground_truth(Index m, Index r_A, double kappa, const SpectrumScheme& scheme,
                              std::uint64_t seed);

// Best Frobenius rank-rho approximation; rho = 0 gives the zero matrix.
Matrix best_rank_rho(const GroundTruth& truth, Index rho);

// Rank-r_A target built from +-1 block waves with distinct random periods,
// orthonormalized by QR and weighted by 0.9^(j-1).
GroundTruth make_blockwave_image(Index m, Index r_A, std::uint64_t seed);

// Rank-one lift A = a a^T of a nonzero vector.
GroundTruth lift_vector(const Vector& a);

}  // namespace wnms

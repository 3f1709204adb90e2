#include "wnms/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace wnms {

namespace {

Vector spectrum_values(Index r_A, double kappa, const SpectrumScheme& scheme) {
  Vector sigma(r_A);
  if (r_A == 1) {
    sigma[0] = 1.0;
    return sigma;
  }
  for (Index j = 0; j < r_A; ++j) {
    const double frac = static_cast<double>(j) / static_cast<double>(r_A - 1);
    const double expnt = scheme.kind == SpectrumKind::LogSpaced ? frac : std::pow(frac, scheme.p);
    sigma[j] = std::pow(kappa, -expnt);
  }
  return sigma;
}

}  // namespace

GroundTruth make_ground_truth(Index m, Index r_A, double kappa, const SpectrumScheme& scheme,
                              std::uint64_t seed) {
  if (r_A < 1 || r_A > m) {
    throw std::invalid_argument("make_ground_truth: need 1 <= r_A <= m");
  }
  if (kappa < 1.0) {
    throw std::invalid_argument("make_ground_truth: kappa must be >= 1");
  }
  if (r_A == 1 && kappa != 1.0) {
    throw std::invalid_argument("make_ground_truth: rank-one target requires kappa = 1");
  }
  if (scheme.kind == SpectrumKind::PowerSpaced && !(scheme.p > 0.0 && scheme.p <= 1.0)) {
    throw std::invalid_argument("make_ground_truth: power-spacing exponent must lie in (0, 1]");
  }
  GroundTruth truth;
  truth.m = m;
  truth.r_A = r_A;
  truth.kappa = kappa;
  truth.U = random_stiefel(m, r_A, seed);
  truth.sigma = spectrum_values(r_A, kappa, scheme);
  truth.A = truth.U * truth.sigma.asDiagonal() * truth.U.transpose();
  return truth;
}

Matrix best_rank_rho(const GroundTruth& truth, Index rho) {
  if (rho < 0 || rho > truth.r_A) {
    throw std::invalid_argument("best_rank_rho: rho = " + std::to_string(rho) +
                                " out of range [0, " + std::to_string(truth.r_A) + "]");
  }
  if (rho == 0) return Matrix::Zero(truth.m, truth.m);
  return truth.U.leftCols(rho) * truth.sigma.head(rho).asDiagonal() *
         truth.U.leftCols(rho).transpose();
}

GroundTruth make_blockwave_image(Index m, Index r_A, std::uint64_t seed) {
  if (r_A < 1 || m < 2 * r_A) {
    throw std::invalid_argument("make_blockwave_image: need m >= 2 r_A >= 2");
  }
  const Index max_half = m / 4;  // period 2h in [4, m/2]
  if (max_half < 2 || r_A > max_half - 1) {
    throw std::invalid_argument("make_blockwave_image: not enough distinct periods for r_A = " +
                                std::to_string(r_A));
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < 5; ++attempt) {
    std::vector<Index> halves;
    while (static_cast<Index>(halves.size()) < r_A) {
      const Index h = 2 + static_cast<Index>(rng.uniform() * static_cast<double>(max_half - 1));
      bool seen = false;
      for (Index prev : halves) seen = seen || prev == h;
      if (!seen) halves.push_back(h);
    }
    Matrix waves(m, r_A);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (Index j = 0; j < r_A; ++j) {
      for (Index i = 0; i < m; ++i) {
        waves(i, j) = ((i / halves[static_cast<std::size_t>(j)]) % 2 == 0) ? scale : -scale;
      }
    }
    try {
      auto [q, r] = qr_positive(waves);
      GroundTruth truth;
      truth.m = m;
      truth.r_A = r_A;
      truth.U = std::move(q);
      truth.sigma.resize(r_A);
      for (Index j = 0; j < r_A; ++j) truth.sigma[j] = std::pow(0.9, static_cast<double>(j));
      truth.kappa = 1.0 / truth.sigma[r_A - 1];
      truth.A = truth.U * truth.sigma.asDiagonal() * truth.U.transpose();
      return truth;
    } catch (const std::invalid_argument&) {
      continue;  // dependent waves, redraw the periods
    }
  }
  throw std::runtime_error("make_blockwave_image: could not draw independent block waves");
}

GroundTruth lift_vector(const Vector& a) {
  const double norm = a.norm();
  if (a.size() == 0 || norm == 0.0) {
    throw std::invalid_argument("lift_vector: vector must be nonzero");
  }
  GroundTruth truth;
  truth.m = a.size();
  truth.r_A = 1;
  truth.kappa = 1.0;
  truth.lifted = true;
  truth.U = a / norm;
  truth.sigma = Vector::Constant(1, norm * norm);
  truth.A = a * a.transpose();
  return truth;
}

}  // namespace wnms

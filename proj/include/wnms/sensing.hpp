#pragma once

#include <cstdint>
#include <string>

#include "wnms/matcore.hpp"
#include "wnms/model.hpp"

namespace wnms {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class EnsembleMode { Dense, Population };

// Linear measurement map M(Z)_i = Tr(M_i^T Z). Dense mode stores the n
// symmetric feature matrices packed one per row (n x m^2), so forward and
// adjoint applications are single mat-vec products. Population mode stands
// in for the infinite-data limit: its composite M*M is the exact identity.
class MeasurementEnsemble {
 public:
  static MeasurementEnsemble population(Index m);
  static MeasurementEnsemble dense(Index m, RowMat packed);

  EnsembleMode mode() const { return mode_; }
  Index m() const { return m_; }
  Index n() const { return packed_.rows(); }

  // Dense only: the i-th feature matrix, unpacked to m x m.
  Matrix feature(Index i) const;
  const RowMat& packed() const { return packed_; }

  // FNV-1a over the packed bytes; used by the harness to certify that
  // paired runs consumed identical data.
  std::uint64_t checksum() const;

 private:
  MeasurementEnsemble(EnsembleMode mode, Index m) : mode_(mode), m_(m) {}
  EnsembleMode mode_;
  Index m_;
  RowMat packed_;
};

struct LabelVector {
  Vector values;
  double noise_std = 0.0;
};

struct RipEstimate {
  Index rank_tested = 0;
  long trials = 0;
  double delta_hat = 0.0;  // max_t |  |M(A_t)|^2 / |A_t|_F^2 - 1 |
  std::uint64_t seed = 0;
};

// M_i = (R_i + R_i^T) / (2 sqrt(n)) with i.i.d. standard Gaussian R_i, so
// diagonal entries have variance 1/n and off-diagonal 1/(2n).
MeasurementEnsemble gen_gaussian_ensemble(Index m, Index n, std::uint64_t seed);

Vector apply_forward(const MeasurementEnsemble& ens, const Matrix& z);
Matrix apply_adjoint(const MeasurementEnsemble& ens, const Vector& v);

// M*M(z) in Dense mode, z itself in Population mode.
Matrix composite(const MeasurementEnsemble& ens, const Matrix& z);

// y_i = Tr(M_i^T A) + b_i with b_i ~ N(0, noise_std^2), drawn once and frozen.
LabelVector gen_labels(const MeasurementEnsemble& ens, const GroundTruth& truth, double noise_std,
                       std::uint64_t seed);

// Sampled lower bound on the RIP constant of order rank_k, from random
// normalized rank-k symmetric test matrices Q D Q^T.
RipEstimate rip_estimate(const MeasurementEnsemble& ens, Index rank_k, long trials,
                         std::uint64_t seed);

// Binary dump: magic "MSEN1", m and n as 64-bit LE unsigned, then n*m*m
// 64-bit LE IEEE-754 doubles, row-major per matrix.
void save_ensemble(const MeasurementEnsemble& ens, const std::string& path);
MeasurementEnsemble load_ensemble(const std::string& path);

// What a solver fits against: measurement labels under a Dense ensemble,
// or the target matrix itself under the population operator.
class Observations {
 public:
  static Observations labels(LabelVector y);
  static Observations population(Matrix target);

  bool is_population() const { return population_; }
  const LabelVector& label_vector() const;
  const Vector& y() const { return label_vector().values; }
  const Matrix& target() const;

 private:
  Observations() = default;
  bool population_ = false;
  LabelVector labels_;
  Matrix target_;
};

struct ResidualEval {
  Matrix residual;   // M*(M(z) - y) in Dense mode, z - A in Population mode
  double objective;  // (1/4) |M(z) - y|^2, resp. (1/4) |z - A|_F^2
};

// One residual pass shared by every gradient in the toolkit; evaluating it
// once per iterate avoids a second sweep over the features.
ResidualEval eval_residual(const MeasurementEnsemble& ens, const Matrix& z,
                           const Observations& obs);

Matrix sensed_residual(const MeasurementEnsemble& ens, const Matrix& z, const Observations& obs);
double objective_value(const MeasurementEnsemble& ens, const Matrix& z, const Observations& obs);

}  // namespace wnms

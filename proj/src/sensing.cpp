#include "wnms/sensing.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace wnms {

namespace {

constexpr char kMagic[5] = {'M', 'S', 'E', 'N', '1'};

void require_dense(const MeasurementEnsemble& ens, const char* op) {
  if (ens.mode() != EnsembleMode::Dense) {
    throw std::invalid_argument(std::string(op) + ": not supported for a population ensemble");
  }
}

void require_symmetric_square(const MeasurementEnsemble& ens, const Matrix& z, const char* op) {
  if (z.rows() != ens.m() || z.cols() != ens.m()) {
    throw std::invalid_argument(std::string(op) + ": expected a " + std::to_string(ens.m()) +
                                "-dimensional symmetric matrix");
  }
  const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
  if (max_asymmetry(z) > 1e-12 * scale) {
    throw std::invalid_argument(std::string(op) + ": matrix is not symmetric");
  }
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

MeasurementEnsemble MeasurementEnsemble::population(Index m) {
  if (m < 1) throw std::invalid_argument("MeasurementEnsemble: m must be positive");
  return MeasurementEnsemble(EnsembleMode::Population, m);
}

MeasurementEnsemble MeasurementEnsemble::dense(Index m, RowMat packed) {
  if (m < 1) throw std::invalid_argument("MeasurementEnsemble: m must be positive");
  if (packed.cols() != m * m) {
    throw std::invalid_argument("MeasurementEnsemble: packed features must have m^2 columns");
  }
  MeasurementEnsemble ens(EnsembleMode::Dense, m);
  ens.packed_ = std::move(packed);
  return ens;
}

Matrix MeasurementEnsemble::feature(Index i) const {
  if (mode_ != EnsembleMode::Dense) {
    throw std::invalid_argument("MeasurementEnsemble::feature: population ensemble has none");
  }
  if (i < 0 || i >= n()) throw std::invalid_argument("MeasurementEnsemble::feature: index out of range");
  return Eigen::Map<const Matrix>(packed_.row(i).data(), m_, m_);
}

std::uint64_t MeasurementEnsemble::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* data = reinterpret_cast<const unsigned char*>(packed_.data());
  const std::size_t bytes = static_cast<std::size_t>(packed_.size()) * sizeof(double);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

MeasurementEnsemble gen_gaussian_ensemble(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("gen_gaussian_ensemble: m, n must be positive");
  RowMat packed(n, m * m);
  Rng rng(seed);
  const double scale = 1.0 / (2.0 * std::sqrt(static_cast<double>(n)));
  Matrix raw(m, m);
  for (Index i = 0; i < n; ++i) {
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) raw(a, b) = rng.gaussian();
    }
    const Matrix sym = (raw + raw.transpose()) * scale;
    packed.row(i) = Eigen::Map<const Eigen::RowVectorXd>(sym.data(), m * m);
  }
  return MeasurementEnsemble::dense(m, std::move(packed));
}

Vector apply_forward(const MeasurementEnsemble& ens, const Matrix& z) {
  require_dense(ens, "apply_forward");
  require_symmetric_square(ens, z, "apply_forward");
  const Eigen::Map<const Vector> zv(z.data(), z.size());
  return ens.packed() * zv;
}

Matrix apply_adjoint(const MeasurementEnsemble& ens, const Vector& v) {
  require_dense(ens, "apply_adjoint");
  if (v.size() != ens.n()) {
    throw std::invalid_argument("apply_adjoint: vector length " + std::to_string(v.size()) +
                                " does not match n = " + std::to_string(ens.n()));
  }
  const Vector acc = ens.packed().transpose() * v;
  return Eigen::Map<const Matrix>(acc.data(), ens.m(), ens.m());
}

Matrix composite(const MeasurementEnsemble& ens, const Matrix& z) {
  if (ens.mode() == EnsembleMode::Population) {
    require_symmetric_square(ens, z, "composite");
    return z;
  }
  return apply_adjoint(ens, apply_forward(ens, z));
}

LabelVector gen_labels(const MeasurementEnsemble& ens, const GroundTruth& truth, double noise_std,
                       std::uint64_t seed) {
  require_dense(ens, "gen_labels");
  if (noise_std < 0.0) throw std::invalid_argument("gen_labels: noise_std must be >= 0");
  LabelVector labels;
  labels.noise_std = noise_std;
  labels.values = apply_forward(ens, truth.A);
  if (noise_std > 0.0) {
    Rng rng(seed);
    for (Index i = 0; i < labels.values.size(); ++i) {
      labels.values[i] += noise_std * rng.gaussian();
    }
  }
  return labels;
}

RipEstimate rip_estimate(const MeasurementEnsemble& ens, Index rank_k, long trials,
                         std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("rip_estimate: trials must be >= 1");
  if (rank_k < 1 || rank_k > ens.m()) {
    throw std::invalid_argument("rip_estimate: rank_k out of range");
  }
  RipEstimate est{rank_k, trials, 0.0, seed};
  if (ens.mode() == EnsembleMode::Population) return est;  // delta is 0 by construction
  Rng root(seed);
  for (long t = 0; t < trials; ++t) {
    Rng trial = root.split(static_cast<std::uint64_t>(t));
    const Matrix q = random_stiefel(ens.m(), rank_k, trial);
    Vector d(rank_k);
    for (Index i = 0; i < rank_k; ++i) d[i] = trial.gaussian();
    const Matrix test = q * d.asDiagonal() * q.transpose();
    const double fro2 = test.squaredNorm();
    if (fro2 == 0.0) continue;
    const double ratio = apply_forward(ens, test).squaredNorm() / fro2;
    est.delta_hat = std::max(est.delta_hat, std::abs(ratio - 1.0));
  }
  return est;
}

void save_ensemble(const MeasurementEnsemble& ens, const std::string& path) {
  require_dense(ens, "save_ensemble");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_ensemble: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u64_le(out, static_cast<std::uint64_t>(ens.m()));
  write_u64_le(out, static_cast<std::uint64_t>(ens.n()));
  const RowMat& packed = ens.packed();
  for (Index i = 0; i < packed.size(); ++i) {
    write_u64_le(out, std::bit_cast<std::uint64_t>(*(packed.data() + i)));
  }
  if (!out) throw std::runtime_error("save_ensemble: write failed for " + path);
}

Observations Observations::labels(LabelVector y) {
  Observations obs;
  obs.population_ = false;
  obs.labels_ = std::move(y);
  return obs;
}

Observations Observations::population(Matrix target) {
  if (target.rows() != target.cols()) {
    throw std::invalid_argument("Observations::population: target must be square");
  }
  Observations obs;
  obs.population_ = true;
  obs.target_ = std::move(target);
  return obs;
}

const LabelVector& Observations::label_vector() const {
  if (population_) {
    throw std::invalid_argument("Observations: population observations carry no labels");
  }
  return labels_;
}

const Matrix& Observations::target() const {
  if (!population_) {
    throw std::invalid_argument("Observations: label observations carry no target matrix");
  }
  return target_;
}

ResidualEval eval_residual(const MeasurementEnsemble& ens, const Matrix& z,
                           const Observations& obs) {
  ResidualEval eval;
  if (ens.mode() == EnsembleMode::Population) {
    if (!obs.is_population()) {
      throw std::invalid_argument("eval_residual: population ensemble needs a target matrix");
    }
    eval.residual = z - obs.target();
    eval.objective = 0.25 * eval.residual.squaredNorm();
    return eval;
  }
  const Vector v = apply_forward(ens, z) - obs.y();
  eval.residual = apply_adjoint(ens, v);
  eval.objective = 0.25 * v.squaredNorm();
  return eval;
}

Matrix sensed_residual(const MeasurementEnsemble& ens, const Matrix& z, const Observations& obs) {
  return eval_residual(ens, z, obs).residual;
}

double objective_value(const MeasurementEnsemble& ens, const Matrix& z, const Observations& obs) {
  return eval_residual(ens, z, obs).objective;
}

MeasurementEnsemble load_ensemble(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_ensemble: cannot open " + path);
  char magic[5];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("load_ensemble: bad magic in " + path);
  }
  const auto m = static_cast<Index>(read_u64_le(in));
  const auto n = static_cast<Index>(read_u64_le(in));
  if (!in || m < 1 || n < 1) throw std::runtime_error("load_ensemble: bad header in " + path);
  RowMat packed(n, m * m);
  for (Index i = 0; i < packed.size(); ++i) {
    *(packed.data() + i) = std::bit_cast<double>(read_u64_le(in));
  }
  if (!in) throw std::runtime_error("load_ensemble: truncated data in " + path);
  return MeasurementEnsemble::dense(m, std::move(packed));
}

}  // namespace wnms

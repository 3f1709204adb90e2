#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>

#include "wnms/rng.hpp"

namespace wnms {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct SymEigen {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // orthonormal columns, sign-fixed
};

struct SvdResult {
  Matrix left;
  Vector singulars;  // nonnegative, descending
  Matrix right;
};

// Largest absolute deviation from symmetry, max_{ij} |s_ij - s_ji|.
double max_asymmetry(const Matrix& s);

// Product with a fixed (row, col, k) summation order.
Matrix matmul(const Matrix& a, const Matrix& b);

// Eigendecomposition of a symmetric matrix, eigenvalues descending. Each
// eigenvector is flipped so its largest-magnitude entry (first on ties) is
// nonnegative, which keeps traces reproducible across platforms.
SymEigen sym_eigendecompose(const Matrix& s);

// (s)^(-1/2) for symmetric PSD s. Eigenvalues in [-1e-12, 0) are treated as
// symmetrization noise and clamped to zero; a zero eigenvalue after clamping
// is an error since the inverse is required.
Matrix inv_sqrt_psd(const Matrix& s);

// Top-k singular triplets, signs fixed by the left vectors as in
// sym_eigendecompose (the paired right vector is flipped along with it).
SvdResult compact_svd(const Matrix& a, Index k);

// a = Q R with orthonormal Q and upper-triangular R whose diagonal is
// strictly positive (the unique such factorization for full column rank a).
std::pair<Matrix, Matrix> qr_positive(const Matrix& a);

// Entries i.i.d. N(0,1), filled in row-major order.
Matrix random_gaussian(Index rows, Index cols, Rng& rng);
Matrix random_gaussian(Index rows, Index cols, std::uint64_t seed);

// Haar-uniform point on St(m, r): Z (Z^T Z)^(-1/2) with Gaussian Z.
Matrix random_stiefel(Index m, Index r, Rng& rng);
Matrix random_stiefel(Index m, Index r, std::uint64_t seed);

}  // namespace wnms

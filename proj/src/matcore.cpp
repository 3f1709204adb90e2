#include "wnms/matcore.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace wnms {

namespace {

// Flip each column so its largest-magnitude entry (first on ties) is >= 0.
// Returns which columns were flipped so SVD can mirror the right factor.
std::vector<bool> fix_column_signs(Matrix& v) {
  std::vector<bool> flipped(static_cast<std::size_t>(v.cols()), false);
  for (Index j = 0; j < v.cols(); ++j) {
    Index best = 0;
    double best_mag = std::abs(v(0, j));
    for (Index i = 1; i < v.rows(); ++i) {
      const double mag = std::abs(v(i, j));
      if (mag > best_mag) {
        best_mag = mag;
        best = i;
      }
    }
    if (v(best, j) < 0.0) {
      v.col(j) *= -1.0;
      flipped[static_cast<std::size_t>(j)] = true;
    }
  }
  return flipped;
}

}  // namespace

double max_asymmetry(const Matrix& s) {
  if (s.rows() != s.cols()) return std::numeric_limits<double>::infinity();
  return (s - s.transpose()).cwiseAbs().maxCoeff();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions " + std::to_string(a.cols()) +
                                " and " + std::to_string(b.rows()) + " do not match");
  }
  Matrix c(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  }
  return c;
}

SymEigen sym_eigendecompose(const Matrix& s) {
  if (s.rows() != s.cols()) {
    throw std::invalid_argument("sym_eigendecompose: matrix must be square");
  }
  if (s.rows() == 0) {
    throw std::invalid_argument("sym_eigendecompose: matrix must be nonempty");
  }
  if (max_asymmetry(s) > 1e-12) {
    throw std::invalid_argument("sym_eigendecompose: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sym_eigendecompose: eigensolver did not converge");
  }
  const Index n = s.rows();
  SymEigen out;
  out.eigenvalues = solver.eigenvalues().reverse();  // ascending -> descending
  out.eigenvectors.resize(n, n);
  for (Index j = 0; j < n; ++j) out.eigenvectors.col(j) = solver.eigenvectors().col(n - 1 - j);
  fix_column_signs(out.eigenvectors);
  return out;
}

Matrix inv_sqrt_psd(const Matrix& s) {
  SymEigen eig = sym_eigendecompose(s);
  Vector lam = eig.eigenvalues;
  for (Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < -1e-12) {
      throw std::invalid_argument("inv_sqrt_psd: eigenvalue " + std::to_string(lam[i]) +
                                  " below -1e-12, input is not PSD");
    }
    if (lam[i] < 0.0) lam[i] = 0.0;
    if (lam[i] == 0.0) {
      throw std::invalid_argument("inv_sqrt_psd: zero eigenvalue, inverse does not exist");
    }
  }
  const Vector d = lam.array().rsqrt();
  return eig.eigenvectors * d.asDiagonal() * eig.eigenvectors.transpose();
}

SvdResult compact_svd(const Matrix& a, Index k) {
  const Index kmax = std::min(a.rows(), a.cols());
  if (k < 1 || k > kmax) {
    throw std::invalid_argument("compact_svd: k = " + std::to_string(k) +
                                " out of range [1, " + std::to_string(kmax) + "]");
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out;
  out.left = svd.matrixU().leftCols(k);
  out.singulars = svd.singularValues().head(k);
  out.right = svd.matrixV().leftCols(k);
  const auto flipped = fix_column_signs(out.left);
  for (Index j = 0; j < k; ++j) {
    if (flipped[static_cast<std::size_t>(j)]) out.right.col(j) *= -1.0;
  }
  return out;
}

std::pair<Matrix, Matrix> qr_positive(const Matrix& a) {
  const Index n = a.cols();
  if (a.rows() < n || n == 0) {
    throw std::invalid_argument("qr_positive: input must be tall or square with >= 1 column");
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), n);
  Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    if (std::abs(r(i, i)) <= 1e-12) {
      throw std::invalid_argument("qr_positive: input is rank deficient");
    }
    if (r(i, i) < 0.0) {
      q.col(i) *= -1.0;
      r.row(i) *= -1.0;
    }
  }
  return {std::move(q), std::move(r)};
}

Matrix random_gaussian(Index rows, Index cols, Rng& rng) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("random_gaussian: dimensions must be positive");
  }
  Matrix z(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) z(i, j) = rng.gaussian();
  }
  return z;
}

Matrix random_gaussian(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return random_gaussian(rows, cols, rng);
}

Matrix random_stiefel(Index m, Index r, Rng& rng) {
  if (r > m) {
    throw std::invalid_argument("random_stiefel: r = " + std::to_string(r) +
                                " exceeds m = " + std::to_string(m));
  }
  const Matrix z = random_gaussian(m, r, rng);
  return z * inv_sqrt_psd(z.transpose() * z);
}

Matrix random_stiefel(Index m, Index r, std::uint64_t seed) {
  Rng rng(seed);
  return random_stiefel(m, r, rng);
}

}  // namespace wnms

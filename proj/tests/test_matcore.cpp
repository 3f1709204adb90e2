#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "wnms/matcore.hpp"

using namespace wnms;

namespace {

// Independent triple-loop oracle for the product contract.
Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      for (Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
    }
  }
  return c;
}

}  // namespace

TEST_CASE("matmul identity and zero") {
  const Matrix b = random_gaussian(3, 5, 17);
  CHECK((matmul(Matrix::Identity(3, 3), b) - b).norm() == 0.0);
  CHECK(matmul(Matrix::Zero(4, 3), b).norm() == 0.0);
}

TEST_CASE("matmul matches the triple-loop oracle exactly") {
  const Matrix a = random_gaussian(3, 4, 1);
  const Matrix b = random_gaussian(4, 2, 2);
  const Matrix c = matmul(a, b);
  const Matrix ref = naive_product(a, b);
  for (Index i = 0; i < c.size(); ++i) CHECK(*(c.data() + i) == *(ref.data() + i));
}

TEST_CASE("matmul rejects mismatched shapes") {
  CHECK_THROWS_AS(matmul(Matrix::Zero(2, 3), Matrix::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("sym_eigendecompose on diagonal input") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const SymEigen eig = sym_eigendecompose(d);
  CHECK(eig.eigenvalues[0] == doctest::Approx(3.0));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
  CHECK((eig.eigenvectors - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("sym_eigendecompose of the identity") {
  const SymEigen eig = sym_eigendecompose(Matrix::Identity(4, 4));
  for (Index i = 0; i < 4; ++i) CHECK(eig.eigenvalues[i] == doctest::Approx(1.0));
}

TEST_CASE("sym_eigendecompose reconstructs random symmetric matrices") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix g = random_gaussian(5, 5, seed);
    const Matrix s = 0.5 * (g + g.transpose());
    const SymEigen eig = sym_eigendecompose(s);
    const Matrix back = eig.eigenvectors * eig.eigenvalues.asDiagonal() * eig.eigenvectors.transpose();
    CHECK((back - s).norm() / s.norm() < 1e-9);
    CHECK((eig.eigenvectors.transpose() * eig.eigenvectors - Matrix::Identity(5, 5)).norm() <
          1e-10);
    for (Index i = 0; i + 1 < 5; ++i) CHECK(eig.eigenvalues[i] >= eig.eigenvalues[i + 1]);
  }
}

TEST_CASE("sym_eigendecompose rejects bad input") {
  CHECK_THROWS_AS(sym_eigendecompose(Matrix::Zero(2, 3)), std::invalid_argument);
  Matrix s = Matrix::Zero(2, 2);
  s(0, 1) = 1e-6;
  CHECK_THROWS_AS(sym_eigendecompose(s), std::invalid_argument);
}

TEST_CASE("inv_sqrt_psd basics") {
  CHECK((inv_sqrt_psd(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-12);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const Matrix b = inv_sqrt_psd(d);
  CHECK(b(0, 0) == doctest::Approx(0.5));
  CHECK(b(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(b(0, 1)) < 1e-15);
}

TEST_CASE("inv_sqrt_psd multiply-back and commutation") {
  const Matrix g = random_gaussian(4, 4, 9);
  const Matrix s = g * g.transpose() + 0.5 * Matrix::Identity(4, 4);
  const Matrix b = inv_sqrt_psd(s);
  CHECK((b * b * s - Matrix::Identity(4, 4)).norm() < 1e-8);
  CHECK((b * s - s * b).norm() < 1e-8 * s.norm());
}

TEST_CASE("inv_sqrt_psd rejects non-PSD and singular input") {
  Matrix neg = Matrix::Identity(2, 2);
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(inv_sqrt_psd(neg), std::invalid_argument);
  Matrix sing = Matrix::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(inv_sqrt_psd(sing), std::invalid_argument);
}

TEST_CASE("compact_svd on diagonal input") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 5.0;
  d(1, 1) = 2.0;
  const SvdResult svd = compact_svd(d, 2);
  CHECK(svd.singulars[0] == doctest::Approx(5.0));
  CHECK(svd.singulars[1] == doctest::Approx(2.0));
}

TEST_CASE("compact_svd of a rank-one outer product") {
  Vector u = random_gaussian(6, 1, 3).col(0);
  u /= u.norm();
  const Matrix a = u * u.transpose();
  const SvdResult svd = compact_svd(a, 1);
  CHECK(svd.singulars[0] == doctest::Approx(1.0));
  const double align = std::abs(svd.left.col(0).dot(u));
  CHECK(align == doctest::Approx(1.0));
}

TEST_CASE("compact_svd reconstructs and matches Gram eigenvalues") {
  const Matrix a = random_gaussian(6, 4, 21);
  const SvdResult svd = compact_svd(a, 4);
  const Matrix back = svd.left * svd.singulars.asDiagonal() * svd.right.transpose();
  CHECK((back - a).norm() / a.norm() < 1e-8);
  const SymEigen gram = sym_eigendecompose(a.transpose() * a);
  for (Index i = 0; i < 4; ++i) {
    CHECK(svd.singulars[i] == doctest::Approx(std::sqrt(gram.eigenvalues[i])).epsilon(1e-8));
  }
  CHECK_THROWS_AS(compact_svd(a, 5), std::invalid_argument);
}

TEST_CASE("qr_positive is the identity on orthonormal input") {
  const Matrix q0 = random_stiefel(6, 3, 4);
  const auto [q, r] = qr_positive(q0);
  CHECK((q - q0).norm() < 1e-10);
  CHECK((r - Matrix::Identity(3, 3)).norm() < 1e-10);
}

TEST_CASE("qr_positive recovers column scales") {
  const Matrix q0 = random_stiefel(5, 2, 8);
  Matrix a = q0;
  a.col(0) *= 2.0;
  a.col(1) *= 3.0;
  const auto [q, r] = qr_positive(a);
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == doctest::Approx(3.0));
  CHECK(std::abs(r(0, 1)) < 1e-12);
}

TEST_CASE("qr_positive reconstructs with positive diagonal") {
  const Matrix a = random_gaussian(5, 3, 12);
  const auto [q, r] = qr_positive(a);
  CHECK((q * r - a).norm() < 1e-10);
  CHECK((q.transpose() * q - Matrix::Identity(3, 3)).norm() < 1e-10);
  for (Index i = 0; i < 3; ++i) CHECK(r(i, i) > 0.0);
}

TEST_CASE("qr_positive rejects rank-deficient input") {
  Matrix a(4, 2);
  a.col(0) = random_gaussian(4, 1, 2).col(0);
  a.col(1) = 2.0 * a.col(0);
  CHECK_THROWS_AS(qr_positive(a), std::invalid_argument);
}

TEST_CASE("random_gaussian determinism and seeds") {
  const Matrix a = random_gaussian(4, 3, 5);
  const Matrix b = random_gaussian(4, 3, 5);
  CHECK((a - b).norm() == 0.0);
  const Matrix c = random_gaussian(4, 3, 6);
  CHECK((a - c).norm() > 0.0);
}

TEST_CASE("random_gaussian moments") {
  Rng rng(31);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = random_gaussian(1, 1, rng)(0, 0);
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(sumsq / n - mean * mean - 1.0) < 0.05);
}

TEST_CASE("random_stiefel satisfies the manifold constraint for every seed") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Matrix x = random_stiefel(7, 3, seed);
    CHECK((x.transpose() * x - Matrix::Identity(3, 3)).norm() < 1e-10);
  }
}

TEST_CASE("square random_stiefel is orthogonal") {
  const Matrix x = random_stiefel(5, 5, 77);
  CHECK(std::abs(std::abs(x.determinant()) - 1.0) < 1e-8);
  CHECK_THROWS_AS(random_stiefel(3, 4, 1), std::invalid_argument);
}

TEST_CASE("random_stiefel projector averages to (r/m) I") {
  const Index m = 6, r = 2;
  Matrix mean = Matrix::Zero(m, m);
  Rng rng(99);
  const int draws = 2000;
  for (int i = 0; i < draws; ++i) {
    const Matrix x = random_stiefel(m, r, rng);
    mean += x * x.transpose();
  }
  mean /= draws;
  const Matrix target = (static_cast<double>(r) / m) * Matrix::Identity(m, m);
  CHECK((mean - target).cwiseAbs().maxCoeff() < 0.03);
}

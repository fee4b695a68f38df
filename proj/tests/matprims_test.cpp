#include <mpcert/errors.hpp>
#include <mpcert/matprims.hpp>
#include <mpcert/rng.hpp>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "test_helpers.hpp"

namespace mpcert {
namespace {

using testing::mat;
using testing::vec;

TEST(EigExtremes, DiagonalWeight) {
  const auto e = eig_extremes(SymMatrix::diagonal(vec({10.0, 1.0})));
  EXPECT_DOUBLE_EQ(e.lambda_min, 1.0);
  EXPECT_DOUBLE_EQ(e.lambda_max, 10.0);
}

TEST(EigExtremes, Identity) {
  const auto e = eig_extremes(SymMatrix::identity(3));
  EXPECT_EQ(e.lambda_min, 1.0);
  EXPECT_EQ(e.lambda_max, 1.0);
}

TEST(EigExtremes, TwoByTwoCoupled) {
  const auto e = eig_extremes(SymMatrix(mat({{2, 1}, {1, 2}})));
  EXPECT_NEAR(e.lambda_min, 1.0, 1e-15);
  EXPECT_NEAR(e.lambda_max, 3.0, 1e-15);
}

TEST(EigExtremes, RejectsAsymmetric) {
  EXPECT_THROW(SymMatrix(mat({{1, 2}, {0, 1}})), ValidationError);
}

TEST(SymmetricEigenvalues, MatchesEigenSolverOnRandomMatrices) {
  Lcg64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 2 + trial % 7;
    const Matrix g = testing::random_matrix(rng, n, n, -3, 3);
    const auto s = SymMatrix::symmetrized(g + g.transpose());
    const auto ours = symmetric_eigenvalues(s);
    const Vector ref = Eigen::SelfAdjointEigenSolver<Matrix>(s.matrix()).eigenvalues();
    for (Eigen::Index i = 0; i < n; ++i) {
      EXPECT_NEAR(ours[static_cast<std::size_t>(i)], ref(i), 1e-12 * (1 + ref.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(SpectralNorm, Basics) {
  EXPECT_EQ(spectral_norm(Matrix::Zero(2, 2)), 0.0);
  EXPECT_NEAR(spectral_norm(mat({{2, 0}, {0, -3}})), 3.0, 1e-15);
}

TEST(SpectralNorm, PendulumSurrogate) {
  EXPECT_NEAR(spectral_norm(testing::pendulum_surrogate().A), 1.041, 5e-4);
}

TEST(SpectralNorm, AgreesWithRandomUnitVectorSearch) {
  Lcg64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix m = testing::random_matrix(rng, 3, 2, -2, 2);
    const double norm = spectral_norm(m);
    double best = 0.0;
    // Dense angular sweep: in two dimensions the unit circle is one parameter.
    for (int i = 0; i < 10000; ++i) {
      const double t = 2.0 * 3.141592653589793 * i / 10000.0;
      best = std::max(best, (m * vec({std::cos(t), std::sin(t)})).norm());
    }
    EXPECT_LE(best, norm * (1 + 1e-12));
    EXPECT_NEAR(best, norm, 1e-6 * norm);
    EXPECT_NEAR(norm, Eigen::JacobiSVD<Matrix>(m).singularValues()(0), 1e-12 * norm);
  }
}

TEST(SpectralNorm, RandomizedOracleInHigherDimension) {
  Lcg64 rng(3);
  const Matrix m = testing::random_matrix(rng, 4, 4);
  const double norm = spectral_norm(m);
  double best = 0.0;
  Vector v(4);
  for (int i = 0; i < 10000; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) v(j) = rng.normal();
    best = std::max(best, (m * v.normalized()).norm());
  }
  EXPECT_LE(best, norm * (1 + 1e-12));
  // Random directions approach the top singular vector; the SVD pins the value.
  EXPECT_NEAR(norm, Eigen::JacobiSVD<Matrix>(m).singularValues()(0), 1e-12 * norm);
}

TEST(Cholesky, Examples) {
  EXPECT_EQ(cholesky(SymMatrix::identity(2)), Matrix(Matrix::Identity(2, 2)));
  const Matrix d = cholesky(SymMatrix::diagonal(vec({4, 9})));
  EXPECT_EQ(d, mat({{2, 0}, {0, 3}}));
  const Matrix l = cholesky(SymMatrix(mat({{2, 1}, {1, 2}})));
  EXPECT_NEAR(l(0, 0), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(l(0, 1), 0.0);
  EXPECT_NEAR(l(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(l(1, 1), std::sqrt(1.5), 1e-15);
}

TEST(Cholesky, ReconstructsRandomPositiveDefinite) {
  Lcg64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 8;
    const Matrix g = testing::random_matrix(rng, n, n);
    const auto m = SymMatrix::symmetrized(g * g.transpose() + 0.1 * Matrix::Identity(n, n));
    const Matrix l = cholesky(m);
    EXPECT_LE((l * l.transpose() - m.matrix()).norm(), 1e-10 * m.matrix().norm());
    EXPECT_TRUE(l.isLowerTriangular());
  }
}

TEST(Cholesky, RejectsIndefinite) {
  EXPECT_THROW(cholesky(SymMatrix(mat({{1, 2}, {2, 1}}))), DefinitenessError);
  EXPECT_THROW(cholesky(SymMatrix(Matrix::Zero(2, 2))), DefinitenessError);
}

TEST(Expm, Examples) {
  EXPECT_EQ(expm(Matrix::Zero(3, 3)), Matrix(Matrix::Identity(3, 3)));
  const Matrix d = expm(mat({{0.3, 0}, {0, -2.0}}));
  EXPECT_NEAR(d(0, 0), std::exp(0.3), 1e-15);
  EXPECT_NEAR(d(1, 1), std::exp(-2.0), 1e-15);
  EXPECT_EQ(d(0, 1), 0.0);
  const Matrix n = expm(mat({{0, 0.7}, {0, 0}}));
  EXPECT_NEAR((n - mat({{1, 0.7}, {0, 1}})).norm(), 0.0, 1e-15);
  EXPECT_THROW(expm(Matrix::Zero(2, 3)), ValidationError);
}

TEST(Expm, MatchesPadeReferenceUpToNormTen) {
  Lcg64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    Matrix m = testing::random_matrix(rng, n, n);
    m *= rng.uniform(0.0, 10.0) / std::max(spectral_norm(m), 1e-300);
    const Matrix ours = expm(m);
    const Matrix ref = m.exp();
    EXPECT_LE(spectral_norm(ours - ref), 1e-12 * spectral_norm(ref))
        << "norm " << spectral_norm(m);
  }
}

TEST(Expm, InverseProperty) {
  Lcg64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 4;
    Matrix m = testing::random_matrix(rng, n, n);
    m *= rng.uniform(0.0, 5.0) / spectral_norm(m);
    const Matrix prod = expm(m) * expm(-m);
    EXPECT_LE((prod - Matrix::Identity(n, n)).norm(), 1e-10);
  }
}

TEST(WeightedNorm, Examples) {
  EXPECT_EQ(weighted_norm_sq(Vector::Zero(2), SymMatrix::diagonal(vec({10, 1}))), 0.0);
  EXPECT_EQ(weighted_norm_sq(vec({1, 0}), SymMatrix::diagonal(vec({10, 1}))), 10.0);
  EXPECT_EQ(weighted_norm_sq(vec({1, 1}), SymMatrix(mat({{2, 1}, {1, 2}}))), 6.0);
  EXPECT_THROW(weighted_norm_sq(vec({1, 1, 1}), SymMatrix::identity(2)), ValidationError);
}

TEST(WeightedNorm, RayleighBounds) {
  Lcg64 rng(19);
  const auto q = SymMatrix(mat({{4, 1, 0}, {1, 3, 0.5}, {0, 0.5, 2}}));
  const auto e = eig_extremes(q);
  for (int i = 0; i < 1000; ++i) {
    const Vector x = testing::random_vector(rng, 3, -5, 5);
    const double v = weighted_norm_sq(x, q);
    EXPECT_LE(e.lambda_min * x.squaredNorm(), v * (1 + 1e-14));
    EXPECT_LE(v, e.lambda_max * x.squaredNorm() * (1 + 1e-14));
  }
}

}  // namespace
}  // namespace mpcert

#include "mpcert/matprims.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpcert/errors.hpp"

namespace mpcert {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kJacobiRelTol = 1e-14;
constexpr int kJacobiMaxSweeps = 100;
constexpr int kTaylorOrder = 18;

double off_diagonal_frobenius(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

}  // namespace

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite entry");
  }
}

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw ValidationError("SymMatrix: expected a non-empty square matrix, got " +
                          std::to_string(m_.rows()) + "x" +
                          std::to_string(m_.cols()));
  }
  require_finite(m_, "SymMatrix");
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol) {
    throw ValidationError("SymMatrix: asymmetry " + std::to_string(asym) +
                          " exceeds tolerance");
  }
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw ValidationError("SymMatrix::symmetrized: matrix is not square");
  }
  return SymMatrix(Matrix(0.5 * (m + m.transpose())));
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
  return SymMatrix(Matrix::Identity(n, n));
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  return SymMatrix(Matrix(d.asDiagonal()));
}

std::vector<double> symmetric_eigenvalues(const SymMatrix& m) {
  Matrix a = m.matrix();
  const Eigen::Index n = a.rows();
  const double scale = a.norm();
  const double target = kJacobiRelTol * scale;

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    if (off_diagonal_frobenius(a) <= target) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p,q); see Golub & Van Loan, Alg. 8.4.1.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }

  std::vector<double> eig(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

EigExtremes eig_extremes(const SymMatrix& m) {
  const auto eig = symmetric_eigenvalues(m);
  return {eig.front(), eig.back()};
}

double spectral_norm(const Matrix& m) {
  require_finite(m, "spectral_norm");
  if (m.size() == 0) return 0.0;
  const auto gram = SymMatrix::symmetrized(m.transpose() * m);
  return std::sqrt(std::max(0.0, eig_extremes(gram).lambda_max));
}

Matrix cholesky(const SymMatrix& m) {
  const Matrix& a = m.matrix();
  const Eigen::Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw DefinitenessError("cholesky: matrix is not positive definite (pivot " +
                              std::to_string(j) + ")");
    }
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Matrix expm(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw ValidationError("expm: matrix is not square");
  }
  require_finite(m, "expm");
  const Eigen::Index n = m.rows();

  // Frobenius norm bounds the spectral norm from above.
  const double norm = m.norm();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  }
  const Matrix scaled = m / std::ldexp(1.0, squarings);

  // Horner evaluation of sum_{k=0}^{18} scaled^k / k!.
  Matrix result = Matrix::Identity(n, n);
  for (int k = kTaylorOrder; k >= 1; --k) {
    result = Matrix::Identity(n, n) + (scaled * result) / static_cast<double>(k);
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

double weighted_norm_sq(const Vector& x, const SymMatrix& q) {
  if (x.size() != q.dim()) {
    throw ValidationError("weighted_norm_sq: vector has dimension " +
                          std::to_string(x.size()) + ", weight has " +
                          std::to_string(q.dim()));
  }
  return x.dot(q.matrix() * x);
}

}  // namespace mpcert

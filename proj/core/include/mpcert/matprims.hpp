#pragma once

// Small dense-matrix kernels used throughout mpcert. Dimensions here are tiny
// (n, m <= 8), so everything is written for clarity over asymptotics.

#include <Eigen/Dense>

#include <vector>

namespace mpcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric matrix with validated entries. Holds Q, R and value-function
/// forms P. Construction rejects asymmetry above 1e-12 (absolute) and
/// non-finite entries.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);

  /// Averages m with its transpose first; for results of floating-point
  /// recursions that are symmetric only up to rounding.
  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix identity(Eigen::Index n);
  static SymMatrix diagonal(const Vector& d);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_.cols() == b.m_.cols() &&
           a.m_ == b.m_;
  }

 private:
  Matrix m_;
};

struct EigExtremes {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// All eigenvalues of a symmetric matrix (ascending), by cyclic Jacobi
/// rotations. Stops once the off-diagonal Frobenius mass drops below
/// 1e-14 times the Frobenius norm of the input.
std::vector<double> symmetric_eigenvalues(const SymMatrix& m);

EigExtremes eig_extremes(const SymMatrix& m);

/// Largest singular value, sqrt(lambda_max(m^T m)).
double spectral_norm(const Matrix& m);

/// Lower-triangular L with L L^T = m. Throws DefinitenessError otherwise.
Matrix cholesky(const SymMatrix& m);

/// Matrix exponential by scaling and squaring of an order-18 Taylor series.
Matrix expm(const Matrix& m);

/// x^T Q x.
double weighted_norm_sq(const Vector& x, const SymMatrix& q);

/// Throws ValidationError unless every entry is finite.
void require_finite(const Matrix& m, const char* what);

}  // namespace mpcert

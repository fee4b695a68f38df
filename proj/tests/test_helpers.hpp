#pragma once

#include <mpcert/cost.hpp>
#include <mpcert/matprims.hpp>
#include <mpcert/ocp.hpp>
#include <mpcert/rng.hpp>
#include <mpcert/systems.hpp>

#include <cmath>
#include <vector>

namespace mpcert::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

/// Pendulum weights Q = diag(10, 1), R = 0.1.
inline StageCost pendulum_cost() {
  return StageCost(SymMatrix::diagonal(vec({10.0, 1.0})), SymMatrix(mat({{0.1}})));
}

inline LinearSystem pendulum_surrogate() {
  const auto [a_c, b_c] = pendulum_linearization(PendulumParams{});
  return zoh_discretize_linear(a_c, b_c, 0.1);
}

inline Vector random_vector(Lcg64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

inline Matrix random_matrix(Lcg64& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

/// Random point in the unit ball of R^n.
inline Vector random_in_unit_ball(Lcg64& rng, Eigen::Index n) {
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  return z * (std::pow(rng.uniform(), 1.0 / static_cast<double>(n)) / z.norm());
}

/// Direct minimizer of the N-step discounted LQ cost over the stacked controls.
/// Builds x = Phi x0 + Gamma u and solves the normal equations; shares no code
/// with the Riccati recursion.
inline double batch_lq_cost(const LinearSystem& sys, const StageCost& cost, double gamma,
                            long horizon, const Vector& x0) {
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index m = sys.control_dim();
  const Eigen::Index N = horizon;
  Matrix phi = Matrix::Zero(N * n, n);
  Matrix gam = Matrix::Zero(N * n, N * m);
  Matrix qbar = Matrix::Zero(N * n, N * n);
  Matrix rbar = Matrix::Zero(N * m, N * m);
  Matrix power = Matrix::Identity(n, n);
  double w = 1.0;
  for (Eigen::Index k = 0; k < N; ++k) {
    phi.block(k * n, 0, n, n) = power;
    for (Eigen::Index j = 0; j < k; ++j) {
      Matrix a_pow = Matrix::Identity(n, n);
      for (Eigen::Index t = 0; t < k - 1 - j; ++t) a_pow = a_pow * sys.A;
      gam.block(k * n, j * m, n, m) = a_pow * sys.B_u;
    }
    qbar.block(k * n, k * n, n, n) = w * cost.Q().matrix();
    rbar.block(k * m, k * m, m, m) = w * cost.R().matrix();
    power = power * sys.A;
    w *= gamma;
  }
  const Matrix H = gam.transpose() * qbar * gam + rbar;
  const Vector u = -H.ldlt().solve(gam.transpose() * qbar * phi * x0);
  const Vector xs = phi * x0 + gam * u;
  return xs.dot(qbar * xs) + u.dot(rbar * u);
}

}  // namespace mpcert::testing

#include "mpcert/ocp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mpcert/errors.hpp"
#include "mpcert/parallel.hpp"
#include "mpcert/rng.hpp"

namespace mpcert {

StageCost::StageCost(SymMatrix q, SymMatrix r) : q_(std::move(q)), r_(std::move(r)) {
  try {
    (void)cholesky(q_);
    (void)cholesky(r_);
  } catch (const DefinitenessError&) {
    throw DefinitenessError("StageCost: Q and R must be positive definite");
  }
}

Horizon Horizon::finite(long n) {
  if (n < 1) throw ValidationError("Horizon: finite horizon must be >= 1");
  Horizon h;
  h.infinite_ = false;
  h.n_ = n;
  return h;
}

long Horizon::value() const {
  if (infinite_) throw ValidationError("Horizon: infinite horizon has no integer value");
  return n_;
}

double Horizon::as_real() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : static_cast<double>(n_);
}

std::string Horizon::to_string() const { return infinite_ ? "inf" : std::to_string(n_); }

OCPParams::OCPParams(double g, Horizon h) : gamma(g), horizon(h) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ValidationError("OCPParams: gamma must lie in (0, 1]");
  }
}

namespace {

void check_dims(const LinearSystem& sys, const StageCost& cost) {
  if (cost.state_dim() != sys.state_dim() || cost.control_dim() != sys.control_dim()) {
    throw ValidationError("Riccati: dimensions of Q/R do not match the system");
  }
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
}

}  // namespace

RiccatiSolution riccati_step(const LinearSystem& sys, const StageCost& cost, double gamma,
                             const SymMatrix& p_prev) {
  const Matrix& a = sys.A;
  const Matrix& b = sys.B_u;
  const Matrix& p = p_prev.matrix();
  const Matrix pa = p * a;
  const Matrix s = cost.R().matrix() + gamma * b.transpose() * p * b;
  const Matrix k = gamma * s.ldlt().solve(b.transpose() * pa);
  const Matrix next =
      cost.Q().matrix() + gamma * a.transpose() * pa - gamma * a.transpose() * p * b * k;
  return {QuadValueFunction{SymMatrix::symmetrized(next), Horizon::infinite()},
          FeedbackGain{k, Horizon::infinite()}};
}

std::vector<SymMatrix> riccati_sweep(const LinearSystem& sys, const StageCost& cost,
                                     double gamma, long horizon) {
  check_dims(sys, cost);
  check_gamma(gamma);
  if (horizon < 0) throw ValidationError("riccati_sweep: negative horizon");
  std::vector<SymMatrix> forms;
  forms.reserve(static_cast<std::size_t>(horizon) + 1);
  forms.push_back(SymMatrix(Matrix::Zero(sys.state_dim(), sys.state_dim())));
  for (long k = 0; k < horizon; ++k) {
    forms.push_back(riccati_step(sys, cost, gamma, forms.back()).value.P);
  }
  return forms;
}

RiccatiSolution riccati_finite(const LinearSystem& sys, const StageCost& cost,
                               const OCPParams& params) {
  const long n = params.horizon.value();
  const auto forms = riccati_sweep(sys, cost, params.gamma, n - 1);
  RiccatiSolution sol = riccati_step(sys, cost, params.gamma, forms.back());
  sol.value.horizon = params.horizon;
  sol.gain.horizon = params.horizon;
  return sol;
}

RiccatiSolution riccati_infinite(const LinearSystem& sys, const StageCost& cost,
                                 double gamma) {
  check_dims(sys, cost);
  check_gamma(gamma);
  constexpr long kMaxIterations = 1'000'000;
  SymMatrix p(Matrix::Zero(sys.state_dim(), sys.state_dim()));
  for (long it = 0; it < kMaxIterations; ++it) {
    RiccatiSolution next = riccati_step(sys, cost, gamma, p);
    if (!next.value.P.matrix().allFinite()) break;
    const double change = (next.value.P.matrix() - p.matrix()).norm();
    const bool converged = change <= 1e-12 * (1.0 + p.matrix().norm());
    p = next.value.P;
    if (converged) {
      RiccatiSolution sol = riccati_step(sys, cost, gamma, p);
      sol.value.P = p;
      const Matrix closed = std::sqrt(gamma) * (sys.A - sys.B_u * sol.gain.K);
      const double radius = Eigen::EigenSolver<Matrix>(closed, false)
                                .eigenvalues()
                                .cwiseAbs()
                                .maxCoeff();
      if (!(radius < 1.0)) {
        throw NonStabilizableError(
            "riccati_infinite: converged form does not stabilize the discounted closed "
            "loop (spectral radius " + std::to_string(radius) + ")");
      }
      return sol;
    }
  }
  throw NonStabilizableError(
      "riccati_infinite: no convergence; (sqrt(gamma) A, sqrt(gamma) B_u) appears "
      "non-stabilizable");
}

RiccatiSolution solve_lq(const LinearSystem& sys, const StageCost& cost,
                         const OCPParams& params) {
  if (params.horizon.is_infinite()) return riccati_infinite(sys, cost, params.gamma);
  return riccati_finite(sys, cost, params);
}

double eval_value(const QuadValueFunction& v, const Vector& x) {
  return weighted_norm_sq(x, v.P);
}

double open_loop_cost(const PlantModel& f, const StageCost& cost, double gamma,
                      const Vector& x0, const std::vector<Vector>& controls) {
  double total = 0.0;
  double weight = 1.0;
  Vector x = x0;
  for (const Vector& u : controls) {
    total += weight * cost(x, u);
    x = f(x, u);
    weight *= gamma;
  }
  return total;
}

namespace {

std::vector<Vector> unstack(const Vector& z, Eigen::Index m) {
  std::vector<Vector> out;
  for (Eigen::Index k = 0; k < z.size() / m; ++k) out.push_back(z.segment(k * m, m));
  return out;
}

struct SearchResult {
  Vector z;
  double cost;
};

SearchResult coordinate_search(const std::function<double(const Vector&)>& objective,
                               Vector z, const ControlSet& controls, Eigen::Index m) {
  constexpr double kInitialStep = 0.5;
  constexpr double kMinStep = 1e-9;
  constexpr long kMaxEvaluations = 20'000'000;

  auto project = [&](Vector& v) {
    if (!controls.bounded()) return;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v(i) = std::clamp(v(i), controls.lo()(i % m), controls.hi()(i % m));
    }
  };
  project(z);
  double best = objective(z);
  long evaluations = 1;
  double step = kInitialStep;
  while (step >= kMinStep && evaluations < kMaxEvaluations) {
    bool improved = false;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      for (double dir : {1.0, -1.0}) {
        // Keep stepping while the move pays off.
        while (true) {
          Vector trial = z;
          trial(i) += dir * step;
          project(trial);
          if (trial(i) == z(i)) break;
          const double c = objective(trial);
          ++evaluations;
          if (!(c < best)) break;
          best = c;
          z = std::move(trial);
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {z, best};
}

}  // namespace

OpenLoopSolution solve_shooting(const PlantModel& f, const StageCost& cost,
                                const OCPParams& params, const Vector& x0, int restarts,
                                std::uint64_t seed) {
  const long n_steps = params.horizon.value();
  const Eigen::Index m = f.control_dim();
  if (n_steps > 12 || m * n_steps > 36) {
    throw ValidationError("solve_shooting: requires N <= 12 and m N <= 36");
  }
  if (x0.size() != f.state_dim()) throw ValidationError("solve_shooting: x0 dimension");
  const int starts = std::max(1, restarts);
  const Eigen::Index dim = m * n_steps;

  auto objective = [&](const Vector& z) {
    return open_loop_cost(f, cost, params.gamma, x0, unstack(z, m));
  };

  std::vector<SearchResult> results(static_cast<std::size_t>(starts),
                                    SearchResult{Vector(), 0.0});
  parallel_for(static_cast<std::size_t>(starts), [&](std::size_t r) {
    Vector z = Vector::Zero(dim);
    if (r > 0) {
      Lcg64 rng(seed + 0x9E3779B97F4A7C15ULL * r);
      for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.uniform(-1.0, 1.0);
    }
    results[r] = coordinate_search(objective, z, f.admissible(), m);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    if (results[r].cost < results[best].cost) best = r;
  }
  OpenLoopSolution sol;
  sol.controls = unstack(results[best].z, m);
  sol.cost = open_loop_cost(f, cost, params.gamma, x0, sol.controls);
  return sol;
}

double bellman_residual(const LinearSystem& sys, const StageCost& cost,
                        const OCPParams& params, const Vector& x, int u_grid) {
  const long n = params.horizon.value();
  const auto forms = riccati_sweep(sys, cost, params.gamma, n);
  const SymMatrix& p_prev = forms[static_cast<std::size_t>(n - 1)];
  const SymMatrix& p_n = forms[static_cast<std::size_t>(n)];

  auto q_value = [&](const Vector& u) {
    return cost(x, u) + params.gamma * weighted_norm_sq(sys.step(x, u), p_prev);
  };

  const Matrix s = cost.R().matrix() + params.gamma * sys.B_u.transpose() * p_prev.matrix() * sys.B_u;
  const Vector u_star =
      -params.gamma * s.ldlt().solve(sys.B_u.transpose() * p_prev.matrix() * sys.A * x);
  const double q_star = q_value(u_star);
  double residual = std::abs(weighted_norm_sq(x, p_n) - q_star);

  if (u_grid >= 2) {
    const Eigen::Index m = sys.control_dim();
    const double half_width = 1.0 + u_star.cwiseAbs().maxCoeff();
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    double grid_min = std::numeric_limits<double>::infinity();
    Vector u(m);
    while (true) {
      for (Eigen::Index j = 0; j < m; ++j) {
        u(j) = u_star(j) - half_width +
               (2.0 * half_width * idx[static_cast<std::size_t>(j)]) / (u_grid - 1);
      }
      grid_min = std::min(grid_min, q_value(u));
      std::size_t d = 0;
      while (d < idx.size() && ++idx[d] == u_grid) idx[d++] = 0;
      if (d == idx.size()) break;
    }
    residual = std::max(residual, q_star - grid_min);
  }
  return residual;
}

}  // namespace mpcert

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mpcert/cost.hpp"
#include "mpcert/matprims.hpp"
#include "mpcert/systems.hpp"

namespace mpcert {

/// Prediction horizon: a positive integer or infinity. Infinity is its own
/// state rather than a large integer; formulas branch on is_infinite().
class Horizon {
 public:
  static Horizon finite(long n);
  static Horizon infinite() { return Horizon(); }

  bool is_infinite() const { return infinite_; }
  /// Throws ValidationError for the infinite horizon.
  long value() const;
  /// Horizon as a real; +inf for the infinite horizon.
  double as_real() const;
  std::string to_string() const;

  friend bool operator==(const Horizon&, const Horizon&) = default;

 private:
  Horizon() = default;
  bool infinite_ = true;
  long n_ = 0;
};

struct OCPParams {
  double gamma = 1.0;
  Horizon horizon = Horizon::infinite();

  OCPParams() = default;
  OCPParams(double g, Horizon h);
};

/// Quadratic value function V(x) = x^T P x.
struct QuadValueFunction {
  SymMatrix P;
  Horizon horizon = Horizon::infinite();
};

/// Linear feedback u = -K x.
struct FeedbackGain {
  Matrix K;
  Horizon horizon = Horizon::infinite();

  Vector operator()(const Vector& x) const { return -K * x; }
};

struct RiccatiSolution {
  QuadValueFunction value;
  FeedbackGain gain;
};

struct OpenLoopSolution {
  std::vector<Vector> controls;
  double cost = 0.0;
  /// Derivative-free search: the cost is an upper bound on the optimum.
  bool heuristic = true;
};

/// One step of the discounted value recursion. Given P_k returns P_{k+1} and
/// the gain K minimizing l(x,u) + gamma V_k(A x + B_u u).
RiccatiSolution riccati_step(const LinearSystem& sys, const StageCost& cost, double gamma,
                             const SymMatrix& p_prev);

/// P_0 = 0, ..., P_N for the finite horizon N. Element k is the value form of
/// the (k)-step problem.
std::vector<SymMatrix> riccati_sweep(const LinearSystem& sys, const StageCost& cost,
                                     double gamma, long horizon);

/// V_{gamma,N} and the first-step gain K_N of the finite-horizon problem.
RiccatiSolution riccati_finite(const LinearSystem& sys, const StageCost& cost,
                               const OCPParams& params);

/// Fixed point of the recursion, iterated from P = 0 until
/// ||P_{k+1} - P_k|| <= 1e-12 (1 + ||P_k||). Throws NonStabilizableError after
/// 10^6 iterations or if the closed loop fails spectral radius < 1/sqrt(gamma).
RiccatiSolution riccati_infinite(const LinearSystem& sys, const StageCost& cost,
                                 double gamma);

/// Dispatches on params.horizon.
RiccatiSolution solve_lq(const LinearSystem& sys, const StageCost& cost,
                         const OCPParams& params);

double eval_value(const QuadValueFunction& v, const Vector& x);

/// Discounted cost of applying `controls` open loop from x0 on `f`.
double open_loop_cost(const PlantModel& f, const StageCost& cost, double gamma,
                      const Vector& x0, const std::vector<Vector>& controls);

/// Direct minimization of the N-step cost over the stacked controls by
/// coordinate search (initial step 0.5, halved after a sweep without
/// improvement, stop below 1e-9). Best of `restarts` starts, the first of
/// which is all zeros. Requires N <= 12 and m N <= 36.
OpenLoopSolution solve_shooting(const PlantModel& f, const StageCost& cost,
                                const OCPParams& params, const Vector& x0, int restarts,
                                std::uint64_t seed);

/// |V_N(x) - min_u (l(x,u) + gamma V_{N-1}(A x + B_u u))| with the inner
/// minimum in closed form. The minimizer is also checked against a grid of
/// u_grid points per input around -K_N x; if some grid point beats it, the
/// shortfall is folded into the returned residual.
double bellman_residual(const LinearSystem& sys, const StageCost& cost,
                        const OCPParams& params, const Vector& x, int u_grid);

}  // namespace mpcert

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpcert/bounds.hpp"
#include "mpcert/certify.hpp"
#include "mpcert/cost.hpp"
#include "mpcert/ocp.hpp"
#include "mpcert/systems.hpp"

namespace mpcert {

/// Per-step verification outcome; std::nullopt means the step was not checked.
struct StepFlags {
  std::optional<bool> decay_ok;
  std::optional<bool> rdp_ok;
  std::optional<bool> contract_ok;
};

/// Closed-loop run x_{k+1} = g(x_k, -K x_k). In the unconstrained LQ case the
/// surrogate policy is single-valued, so one rollout is the whole solution
/// set of the closed-loop inclusion.
struct Trajectory {
  std::vector<Vector> states;           ///< x_0 .. x_K
  std::vector<Vector> controls;         ///< u_0 .. u_{K-1}
  std::vector<double> stage_costs;      ///< l(x_k, u_k)
  std::vector<double> discounted_cumcost;
  double discounted_cost = 0.0;
  double gamma = 1.0;
  /// Norm exceeded 1e9; the run was truncated there.
  bool diverged = false;
  /// The state hit the origin exactly; the equilibrium is absorbing, so the
  /// run stops after recording that step.
  bool reached_equilibrium = false;
  std::vector<StepFlags> flags;

  std::size_t steps() const { return controls.size(); }
};

Trajectory rollout(const PlantModel& plant, const FeedbackGain& gain, const StageCost& cost,
                   const Vector& x0, double gamma, long steps);

/// Outcome of one inequality along a trajectory. margin = rhs + tol - lhs, so
/// a step passes iff its margin is >= 0.
struct CheckResult {
  std::vector<std::optional<bool>> ok;
  std::vector<double> margin;
  std::size_t checked = 0;
  std::size_t violated = 0;
  double worst_margin = std::numeric_limits<double>::infinity();

  void record(std::size_t k, double m);
};

/// ||x_k||_Q <= sqrt(B) A^{k/2} ||x_0||_Q + 1e-12 for every recorded state.
CheckResult verify_decay(const Trajectory& traj, const Certificate& cert,
                         const StageCost& cost);

/// gamma V(x_{k+1}) <= V(x_k) - alpha l(x_k, u_k) + 1e-9 (1 + V(x_k)), for
/// every transition that starts inside the region.
CheckResult verify_relaxed_dp(const Trajectory& traj, const QuadValueFunction& value,
                              const Certificate& cert, const StageCost& cost,
                              const Region& region);

/// V(x_{k+1}) <= A V(x_k) + 1e-9 (1 + V(x_k)).
CheckResult verify_contraction(const Trajectory& traj, const QuadValueFunction& value,
                               const Certificate& cert);

struct SuboptimalityCheck {
  bool certifiable = false;  ///< alpha > 0
  bool holds = false;
  double margin = 0.0;       ///< V(x_0) + tol - alpha * truncated cost
  double truncated_cost = 0.0;
  /// (B / alpha) ||x_K||_Q^2, an estimate of the cost beyond the truncation.
  /// Reported, never asserted.
  double tail_estimate = 0.0;
};

/// alpha * (truncated discounted closed-loop cost) <= V(x_0) + 1e-9 (1 + V(x_0)).
/// Truncation under-counts the infinite-horizon cost, so a failure here
/// falsifies the infinite-horizon bound; a pass is necessary, not sufficient.
SuboptimalityCheck verify_suboptimality(const Trajectory& traj,
                                        const QuadValueFunction& value,
                                        const Certificate& cert, const StageCost& cost);

struct SurrogateDecayCheck {
  CheckResult result;
  std::vector<Vector> states;
  /// B == 1 makes the bound zero for k >= 1; flagged for the caller to report.
  bool degenerate = false;
};

/// Rolls the optimal finite-horizon policy (time-varying gains from the
/// Riccati sweep) on the surrogate itself and checks
/// ||x_k||_Q^2 <= ((1 - 1/B) / gamma)^k B ||x_0||_Q^2 for k < N, with
/// relative tolerance 1e-9.
SurrogateDecayCheck verify_surrogate_decay(const LinearSystem& surrogate,
                                           const StageCost& cost, const OCPParams& params,
                                           const Vector& x0, double B);

struct InequalityStats {
  std::size_t checked = 0;
  std::size_t violated = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
};

struct VerificationReport {
  Vector x0;
  bool in_level_set = false;
  bool certified = false;  ///< A < 1
  std::string status;
  InequalityStats decay;
  InequalityStats relaxed_dp;
  InequalityStats contraction;
  SuboptimalityCheck suboptimality;
  std::size_t level_set_exits = 0;
  bool diverged = false;
  Certificate certificate;

  /// Violations of inequalities that were actually certified for this run.
  std::size_t certified_violations() const;
};

/// Runs every check on a closed-loop trajectory and writes the per-step flags
/// back into it. Runs with x_0 outside the level set, or with A >= 1, are
/// checked and reported but labelled unverifiable/uncertified.
VerificationReport verify_closed_loop(Trajectory& traj, const CertificateBundle& bundle,
                                      const StageCost& cost, const Region& region);

/// Seeded uniform samples from the level set {x^T P x <= c_bar}, or from the
/// ball of radius fallback_radius when c_bar is infinite.
std::vector<Vector> sample_in_level_set(const LevelSet& level_set, std::size_t count,
                                        std::uint64_t seed, double fallback_radius = 1.0);

/// CSV with header k,x1..xn,u1..um,stage_cost,discounted_cumcost,decay_ok,
/// rdp_ok,contract_ok. Flags render as 1/0, or empty when not checked.
std::string trajectory_to_csv(const Trajectory& traj);

std::string report_to_json(const VerificationReport& report);

}  // namespace mpcert

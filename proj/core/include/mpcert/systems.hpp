#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "mpcert/matprims.hpp"

namespace mpcert {

/// Admissible control set U: all of R^m, or a box lo <= u <= hi with
/// lo_i <= 0 <= hi_i so that zero is always admissible.
class ControlSet {
 public:
  enum class Kind { kUnconstrained, kBox };

  static ControlSet unconstrained() { return ControlSet(); }
  static ControlSet box(Vector lo, Vector hi);
  static ControlSet symmetric_box(Eigen::Index m, double bound);

  Kind kind() const { return kind_; }
  bool bounded() const { return kind_ == Kind::kBox; }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  bool contains(const Vector& u) const;

 private:
  ControlSet() = default;
  Kind kind_ = Kind::kUnconstrained;
  Vector lo_;
  Vector hi_;
};

/// State-space region S, centered at the origin.
class Region {
 public:
  enum class Kind { kAll, kBall, kBox };

  static Region all() { return Region(); }
  static Region ball(double radius);
  static Region box(Vector half_widths);

  Kind kind() const { return kind_; }
  bool bounded() const { return kind_ != Kind::kAll; }
  double radius() const { return radius_; }
  const Vector& half_widths() const { return half_widths_; }
  bool contains(const Vector& x) const;

 private:
  Region() = default;
  Kind kind_ = Kind::kAll;
  double radius_ = 0.0;
  Vector half_widths_;
};

/// Linear surrogate x+ = A x + B_u u.
struct LinearSystem {
  Matrix A;
  Matrix B_u;

  LinearSystem(Matrix a, Matrix b_u);
  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index control_dim() const { return B_u.cols(); }
  Vector step(const Vector& x, const Vector& u) const { return A * x + B_u * u; }
};

using TransitionMap = std::function<Vector(const Vector&, const Vector&)>;
using VectorField = std::function<Vector(const Vector&, const Vector&)>;

/// Black-box discrete-time system x+ = transition(x, u). The transition must be
/// pure and reentrant, and must fix the origin: transition(0, 0) = 0.
class PlantModel {
 public:
  PlantModel(std::string name, TransitionMap transition, Eigen::Index state_dim,
             Eigen::Index control_dim, ControlSet admissible);

  const std::string& name() const { return name_; }
  Eigen::Index state_dim() const { return n_; }
  Eigen::Index control_dim() const { return m_; }
  const ControlSet& admissible() const { return admissible_; }

  Vector operator()(const Vector& x, const Vector& u) const;

 private:
  std::string name_;
  TransitionMap transition_;
  Eigen::Index n_;
  Eigen::Index m_;
  ControlSet admissible_;
};

struct PendulumParams {
  double gravity_ratio = 0.5;
  double damping = 1.0;
  double step = 0.1;
};

inline constexpr int kDefaultSubsteps = 100;

/// Exact zero-order-hold discretization: A = exp(A_c T) and
/// B_u = int_0^T exp(A_c (T - s)) B_c ds, both read off the exponential of
/// the augmented matrix [[A_c, B_c], [0, 0]] T.
LinearSystem zoh_discretize_linear(const Matrix& a_c, const Matrix& b_c, double step);

/// Continuous-time linearization at the upright equilibrium,
/// A_c = [[0, 1], [g, -d]], B_c = [0, 1]^T.
std::pair<Matrix, Matrix> pendulum_linearization(const PendulumParams& p);

/// Holds u constant over [0, step] and integrates the field with classical
/// RK4 using `substeps` equal substeps.
PlantModel rk4_plant(std::string name, VectorField field, Eigen::Index state_dim,
                     Eigen::Index control_dim, double step, int substeps,
                     ControlSet admissible = ControlSet::unconstrained());

/// x1' = x2, x2' = g sin(x1) - d x2 + u, discretized with rk4_plant.
PlantModel pendulum_plant(const PendulumParams& p, int substeps = kDefaultSubsteps);

/// The linear surrogate wrapped as a black-box plant.
PlantModel linear_plant(const LinearSystem& sys, std::string name = "linear",
                        ControlSet admissible = ControlSet::unconstrained());

/// Named presets: "pendulum" (nonlinear RK4 plant) and "pendulum-linear"
/// (the ZOH-discretized linearization, i.e. plant equals surrogate).
struct SystemPreset {
  std::string name;
  PendulumParams params;
  LinearSystem surrogate;
  PlantModel plant;
};
SystemPreset make_preset(const std::string& name);

struct MismatchEstimate {
  double p_bar = 0.0;
  std::size_t samples_used = 0;
  Vector max_state;
  Vector max_control;
  /// Sampling can only find a lower estimate of the true supremum.
  bool is_lower_estimate = true;
};

/// Sampled max of |f(x,u) - g(x,u)| / (|x| + |u|) over S x U, excluding the
/// origin. Candidates are the tensor grid with grid_per_dim points per
/// coordinate (the control grid always contains u = 0) plus grid_per_dim^2
/// seeded random points. Requires a bounded S and a box U.
MismatchEstimate estimate_mismatch(const PlantModel& f, const PlantModel& g,
                                   const Region& region, const ControlSet& controls,
                                   int grid_per_dim, std::uint64_t seed);

/// Coordinate-wise projection onto a box; identity when unconstrained.
Vector clamp_control(const Vector& u, const ControlSet& controls);

}  // namespace mpcert

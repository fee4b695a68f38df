#include "mpcert/systems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpcert/errors.hpp"
#include "mpcert/rng.hpp"

namespace mpcert {

ControlSet ControlSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size() || lo.size() == 0) {
    throw ValidationError("ControlSet::box: bound dimensions disagree");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo(i) <= 0.0 && 0.0 <= hi(i))) {
      throw ValidationError("ControlSet::box: bounds must satisfy lo <= 0 <= hi");
    }
  }
  ControlSet s;
  s.kind_ = Kind::kBox;
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

ControlSet ControlSet::symmetric_box(Eigen::Index m, double bound) {
  return box(Vector::Constant(m, -bound), Vector::Constant(m, bound));
}

bool ControlSet::contains(const Vector& u) const {
  if (kind_ == Kind::kUnconstrained) return true;
  return (u.array() >= lo_.array()).all() && (u.array() <= hi_.array()).all();
}

Region Region::ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ValidationError("Region::ball: radius must be positive and finite");
  }
  Region r;
  r.kind_ = Kind::kBall;
  r.radius_ = radius;
  return r;
}

Region Region::box(Vector half_widths) {
  if (half_widths.size() == 0 || !(half_widths.array() > 0.0).all() ||
      !half_widths.allFinite()) {
    throw ValidationError("Region::box: half-widths must be positive and finite");
  }
  Region r;
  r.kind_ = Kind::kBox;
  r.half_widths_ = std::move(half_widths);
  return r;
}

bool Region::contains(const Vector& x) const {
  switch (kind_) {
    case Kind::kAll: return true;
    case Kind::kBall: return x.norm() <= radius_;
    case Kind::kBox: return (x.array().abs() <= half_widths_.array()).all();
  }
  return false;
}

LinearSystem::LinearSystem(Matrix a, Matrix b_u) : A(std::move(a)), B_u(std::move(b_u)) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw ValidationError("LinearSystem: A must be square and non-empty");
  }
  if (B_u.rows() != A.rows() || B_u.cols() == 0) {
    throw ValidationError("LinearSystem: B_u must have as many rows as A");
  }
  require_finite(A, "LinearSystem A");
  require_finite(B_u, "LinearSystem B_u");
}

PlantModel::PlantModel(std::string name, TransitionMap transition,
                       Eigen::Index state_dim, Eigen::Index control_dim,
                       ControlSet admissible)
    : name_(std::move(name)),
      transition_(std::move(transition)),
      n_(state_dim),
      m_(control_dim),
      admissible_(std::move(admissible)) {
  if (n_ <= 0 || m_ <= 0) throw ValidationError("PlantModel: dimensions must be positive");
  const Vector origin = transition_(Vector::Zero(n_), Vector::Zero(m_));
  if (origin.size() != n_ || !(origin.norm() <= 1e-9)) {
    throw ValidationError("PlantModel '" + name_ + "': transition(0, 0) must be 0");
  }
}

Vector PlantModel::operator()(const Vector& x, const Vector& u) const {
  if (x.size() != n_ || u.size() != m_) {
    throw ValidationError("PlantModel '" + name_ + "': state/control dimension mismatch");
  }
  return transition_(x, u);
}

LinearSystem zoh_discretize_linear(const Matrix& a_c, const Matrix& b_c, double step) {
  if (a_c.rows() != a_c.cols()) throw ValidationError("zoh_discretize_linear: A_c not square");
  if (b_c.rows() != a_c.rows()) {
    throw ValidationError("zoh_discretize_linear: B_c rows do not match A_c");
  }
  if (!(step > 0.0)) throw ValidationError("zoh_discretize_linear: step must be positive");
  const Eigen::Index n = a_c.rows();
  const Eigen::Index m = b_c.cols();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a_c * step;
  aug.topRightCorner(n, m) = b_c * step;
  const Matrix e = expm(aug);
  return LinearSystem(e.topLeftCorner(n, n), e.topRightCorner(n, m));
}

std::pair<Matrix, Matrix> pendulum_linearization(const PendulumParams& p) {
  Matrix a_c(2, 2);
  a_c << 0.0, 1.0, p.gravity_ratio, -p.damping;
  Matrix b_c(2, 1);
  b_c << 0.0, 1.0;
  return {a_c, b_c};
}

PlantModel rk4_plant(std::string name, VectorField field, Eigen::Index state_dim,
                     Eigen::Index control_dim, double step, int substeps,
                     ControlSet admissible) {
  if (substeps < 1) throw ValidationError("rk4_plant: substeps must be >= 1");
  if (!(step > 0.0)) throw ValidationError("rk4_plant: step must be positive");
  auto transition = [field = std::move(field), step, substeps](const Vector& x0,
                                                               const Vector& u) {
    const double h = step / substeps;
    Vector x = x0;
    for (int i = 0; i < substeps; ++i) {
      const Vector k1 = field(x, u);
      const Vector k2 = field(x + 0.5 * h * k1, u);
      const Vector k3 = field(x + 0.5 * h * k2, u);
      const Vector k4 = field(x + h * k3, u);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
  };
  return PlantModel(std::move(name), std::move(transition), state_dim, control_dim,
                    std::move(admissible));
}

PlantModel pendulum_plant(const PendulumParams& p, int substeps) {
  if (!(p.step > 0.0)) throw ValidationError("pendulum_plant: step must be positive");
  auto field = [g = p.gravity_ratio, d = p.damping](const Vector& x, const Vector& u) {
    Vector dx(2);
    dx << x(1), g * std::sin(x(0)) - d * x(1) + u(0);
    return dx;
  };
  return rk4_plant("pendulum", std::move(field), 2, 1, p.step, substeps);
}

PlantModel linear_plant(const LinearSystem& sys, std::string name, ControlSet admissible) {
  auto transition = [sys](const Vector& x, const Vector& u) { return sys.step(x, u); };
  return PlantModel(std::move(name), std::move(transition), sys.state_dim(),
                    sys.control_dim(), std::move(admissible));
}

SystemPreset make_preset(const std::string& name) {
  const PendulumParams params{};
  const auto [a_c, b_c] = pendulum_linearization(params);
  LinearSystem surrogate = zoh_discretize_linear(a_c, b_c, params.step);
  if (name == "pendulum") {
    return {name, params, surrogate, pendulum_plant(params)};
  }
  if (name == "pendulum-linear") {
    return {name, params, surrogate, linear_plant(surrogate, "pendulum-linear")};
  }
  throw ValidationError("unknown system preset '" + name +
                        "' (expected 'pendulum' or 'pendulum-linear')");
}

Vector clamp_control(const Vector& u, const ControlSet& controls) {
  if (controls.kind() == ControlSet::Kind::kUnconstrained) return u;
  if (u.size() != controls.lo().size()) {
    throw ValidationError("clamp_control: dimension mismatch");
  }
  return u.cwiseMax(controls.lo()).cwiseMin(controls.hi());
}

namespace {

// Index i of an evenly spaced grid on [lo, hi]. Grids with 2g-1 points contain
// the g-point grid bit-exactly: (hi - lo) * 2i / (2(g - 1)) rounds identically.
double grid_point(double lo, double hi, int i, int count) {
  return lo + ((hi - lo) * i) / (count - 1);
}

std::vector<std::vector<double>> coordinate_grids(const Region& region,
                                                  const ControlSet& controls,
                                                  Eigen::Index n, int count) {
  std::vector<std::vector<double>> axes;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = region.kind() == Region::Kind::kBall ? region.radius()
                                                          : region.half_widths()(i);
    std::vector<double> axis;
    for (int k = 0; k < count; ++k) axis.push_back(grid_point(-w, w, k, count));
    axes.push_back(std::move(axis));
  }
  for (Eigen::Index j = 0; j < controls.lo().size(); ++j) {
    std::vector<double> axis;
    for (int k = 0; k < count; ++k) {
      axis.push_back(grid_point(controls.lo()(j), controls.hi()(j), k, count));
    }
    if (std::find(axis.begin(), axis.end(), 0.0) == axis.end()) axis.push_back(0.0);
    axes.push_back(std::move(axis));
  }
  return axes;
}

}  // namespace

MismatchEstimate estimate_mismatch(const PlantModel& f, const PlantModel& g,
                                   const Region& region, const ControlSet& controls,
                                   int grid_per_dim, std::uint64_t seed) {
  if (!region.bounded()) {
    throw UnsupportedRegionError("estimate_mismatch: region must be a ball or a box");
  }
  if (!controls.bounded()) {
    throw UnsupportedRegionError("estimate_mismatch: control set must be a box");
  }
  if (grid_per_dim < 2) throw ValidationError("estimate_mismatch: grid_per_dim must be >= 2");
  const Eigen::Index n = f.state_dim();
  const Eigen::Index m = f.control_dim();
  if (g.state_dim() != n || g.control_dim() != m || controls.lo().size() != m ||
      (region.kind() == Region::Kind::kBox && region.half_widths().size() != n)) {
    throw ValidationError("estimate_mismatch: dimension mismatch");
  }

  MismatchEstimate est;
  est.max_state = Vector::Zero(n);
  est.max_control = Vector::Zero(m);

  auto consider = [&](const Vector& x, const Vector& u) {
    const double denom = x.norm() + u.norm();
    if (denom == 0.0) return;
    ++est.samples_used;
    const double ratio = (f(x, u) - g(x, u)).norm() / denom;
    if (ratio > est.p_bar) {
      est.p_bar = ratio;
      est.max_state = x;
      est.max_control = u;
    }
  };

  const auto axes = coordinate_grids(region, controls, n, grid_per_dim);
  std::vector<std::size_t> idx(axes.size(), 0);
  Vector x(n);
  Vector u(m);
  while (true) {
    for (Eigen::Index i = 0; i < n; ++i) x(i) = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto a = static_cast<std::size_t>(n + j);
      u(j) = axes[a][idx[a]];
    }
    if (region.contains(x)) consider(x, u);
    std::size_t d = 0;
    while (d < idx.size() && ++idx[d] == axes[d].size()) idx[d++] = 0;
    if (d == idx.size()) break;
  }

  Lcg64 rng(seed);
  const long random_points = static_cast<long>(grid_per_dim) * grid_per_dim;
  for (long k = 0; k < random_points; ++k) {
    if (region.kind() == Region::Kind::kBall) {
      Vector dir(n);
      for (Eigen::Index i = 0; i < n; ++i) dir(i) = rng.normal();
      const double r = region.radius() * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
      const double len = dir.norm();
      x = len > 0.0 ? Vector(dir * (r / len)) : Vector(Vector::Zero(n));
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        x(i) = rng.uniform(-region.half_widths()(i), region.half_widths()(i));
      }
    }
    for (Eigen::Index j = 0; j < m; ++j) u(j) = rng.uniform(controls.lo()(j), controls.hi()(j));
    consider(x, u);
  }
  return est;
}

}  // namespace mpcert

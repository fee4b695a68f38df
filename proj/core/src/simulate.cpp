#include "mpcert/simulate.hpp"

#include <cmath>
#include <sstream>

#include "mpcert/errors.hpp"
#include "mpcert/format.hpp"
#include "mpcert/rng.hpp"

namespace mpcert {

namespace {

constexpr double kDivergenceNorm = 1e9;
constexpr double kRelTol = 1e-9;
constexpr double kDecayTol = 1e-12;

InequalityStats stats_of(const CheckResult& r) {
  return {r.checked, r.violated, r.worst_margin};
}

}  // namespace

Trajectory rollout(const PlantModel& plant, const FeedbackGain& gain, const StageCost& cost,
                   const Vector& x0, double gamma, long steps) {
  if (steps < 1) throw ValidationError("rollout: need at least one step");
  if (x0.size() != plant.state_dim() || !x0.allFinite()) {
    throw ValidationError("rollout: x0 must be finite with the plant's state dimension");
  }
  if (gain.K.rows() != plant.control_dim() || gain.K.cols() != plant.state_dim()) {
    throw ValidationError("rollout: gain dimensions do not match the plant");
  }
  Trajectory t;
  t.gamma = gamma;
  t.states.push_back(x0);
  double weight = 1.0;
  for (long k = 0; k < steps; ++k) {
    const Vector& x = t.states.back();
    const Vector u = gain(x);
    const double l = cost(x, u);
    t.controls.push_back(u);
    t.stage_costs.push_back(l);
    t.discounted_cost += weight * l;
    t.discounted_cumcost.push_back(t.discounted_cost);
    weight *= gamma;
    const bool at_origin = (x.array() == 0.0).all();
    Vector next = plant(x, u);
    t.states.push_back(std::move(next));
    if (at_origin) {
      t.reached_equilibrium = true;
      break;
    }
    if (!t.states.back().allFinite() || t.states.back().norm() > kDivergenceNorm) {
      t.diverged = true;
      break;
    }
  }
  t.flags.assign(t.controls.size(), StepFlags{});
  return t;
}

void CheckResult::record(std::size_t k, double m) {
  if (ok.size() <= k) {
    ok.resize(k + 1);
    margin.resize(k + 1, std::numeric_limits<double>::quiet_NaN());
  }
  ok[k] = m >= 0.0;
  margin[k] = m;
  ++checked;
  if (m < 0.0) ++violated;
  worst_margin = std::min(worst_margin, m);
}

CheckResult verify_decay(const Trajectory& traj, const Certificate& cert,
                         const StageCost& cost) {
  CheckResult r;
  const double x0_norm = std::sqrt(weighted_norm_sq(traj.states.front(), cost.Q()));
  const double root_b = std::sqrt(cert.inputs.B);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double lhs = std::sqrt(weighted_norm_sq(traj.states[k], cost.Q()));
    const double rhs = root_b * std::pow(cert.A, 0.5 * static_cast<double>(k)) * x0_norm;
    r.record(k, rhs + kDecayTol - lhs);
  }
  return r;
}

CheckResult verify_relaxed_dp(const Trajectory& traj, const QuadValueFunction& value,
                              const Certificate& cert, const StageCost& cost,
                              const Region& region) {
  CheckResult r;
  r.ok.resize(traj.steps());
  r.margin.resize(traj.steps(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    const Vector& x = traj.states[k];
    if (!region.contains(x)) continue;
    const double v = eval_value(value, x);
    const double lhs = cert.gamma * eval_value(value, traj.states[k + 1]);
    const double rhs = v - cert.alpha * cost(x, traj.controls[k]);
    r.record(k, rhs + kRelTol * (1.0 + v) - lhs);
  }
  return r;
}

CheckResult verify_contraction(const Trajectory& traj, const QuadValueFunction& value,
                               const Certificate& cert) {
  CheckResult r;
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    const double v = eval_value(value, traj.states[k]);
    const double lhs = eval_value(value, traj.states[k + 1]);
    r.record(k, cert.A * v + kRelTol * (1.0 + v) - lhs);
  }
  return r;
}

SuboptimalityCheck verify_suboptimality(const Trajectory& traj,
                                        const QuadValueFunction& value,
                                        const Certificate& cert, const StageCost& cost) {
  SuboptimalityCheck s;
  s.truncated_cost = traj.discounted_cost;
  s.certifiable = cert.alpha > 0.0;
  if (!s.certifiable) return s;
  const double v0 = eval_value(value, traj.states.front());
  s.margin = v0 + kRelTol * (1.0 + v0) - cert.alpha * s.truncated_cost;
  s.holds = s.margin >= 0.0;
  s.tail_estimate =
      (cert.inputs.B / cert.alpha) * weighted_norm_sq(traj.states.back(), cost.Q());
  return s;
}

SurrogateDecayCheck verify_surrogate_decay(const LinearSystem& surrogate,
                                           const StageCost& cost, const OCPParams& params,
                                           const Vector& x0, double B) {
  const long n = params.horizon.value();
  const auto forms = riccati_sweep(surrogate, cost, params.gamma, n);
  SurrogateDecayCheck out;
  out.degenerate = B == 1.0;
  const double x0_sq = weighted_norm_sq(x0, cost.Q());
  const double rate = (1.0 - 1.0 / B) / params.gamma;
  Vector x = x0;
  for (long k = 0; k < n; ++k) {
    out.states.push_back(x);
    const double lhs = weighted_norm_sq(x, cost.Q());
    const double rhs = std::pow(rate, static_cast<double>(k)) * B * x0_sq;
    out.result.record(static_cast<std::size_t>(k), rhs * (1.0 + kRelTol) - lhs);
    // Remaining horizon n - k: its first-step gain comes from P_{n-k-1}.
    const FeedbackGain gain =
        riccati_step(surrogate, cost, params.gamma, forms[static_cast<std::size_t>(n - k - 1)])
            .gain;
    x = surrogate.step(x, gain(x));
  }
  return out;
}

std::size_t VerificationReport::certified_violations() const {
  if (!certified || !in_level_set) return 0;
  return decay.violated + relaxed_dp.violated + contraction.violated +
         ((suboptimality.certifiable && !suboptimality.holds) ? 1 : 0);
}

VerificationReport verify_closed_loop(Trajectory& traj, const CertificateBundle& bundle,
                                      const StageCost& cost, const Region& region) {
  const Certificate& cert = bundle.certificate;
  VerificationReport rep;
  rep.x0 = traj.states.front();
  rep.certificate = cert;
  rep.certified = cert.stable;
  rep.in_level_set = bundle.level_set.contains(rep.x0);
  rep.diverged = traj.diverged;

  const CheckResult decay = verify_decay(traj, cert, cost);
  const CheckResult rdp = verify_relaxed_dp(traj, bundle.value, cert, cost, region);
  const CheckResult contract = verify_contraction(traj, bundle.value, cert);
  rep.decay = stats_of(decay);
  rep.relaxed_dp = stats_of(rdp);
  rep.contraction = stats_of(contract);
  rep.suboptimality = verify_suboptimality(traj, bundle.value, cert, cost);
  for (const Vector& x : traj.states) {
    if (!bundle.level_set.contains(x)) ++rep.level_set_exits;
  }

  for (std::size_t k = 0; k < traj.steps(); ++k) {
    traj.flags[k].decay_ok = decay.ok[k];
    traj.flags[k].rdp_ok = k < rdp.ok.size() ? rdp.ok[k] : std::nullopt;
    traj.flags[k].contract_ok = contract.ok[k];
  }

  if (!rep.certified) {
    rep.status = "uncertified: A >= 1";
  } else if (!rep.in_level_set) {
    rep.status = "unverifiable: x0 outside level set";
  } else if (rep.certified_violations() > 0) {
    rep.status = "violated";
  } else {
    rep.status = "verified";
  }
  return rep;
}

std::vector<Vector> sample_in_level_set(const LevelSet& level_set, std::size_t count,
                                        std::uint64_t seed, double fallback_radius) {
  const Eigen::Index n = level_set.P.dim();
  Lcg64 rng(seed);
  Matrix map;
  if (std::isinf(level_set.c_bar)) {
    map = fallback_radius * Matrix::Identity(n, n);
  } else {
    const Matrix l = cholesky(level_set.P);
    // x = sqrt(c) L^{-T} z maps the unit ball onto the ellipsoid.
    map = std::sqrt(level_set.c_bar) *
          l.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(n, n));
  }
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector z(n);
    for (Eigen::Index j = 0; j < n; ++j) z(j) = rng.normal();
    const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
    z *= radius / z.norm();
    out.push_back(map * z);
  }
  return out;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  const Eigen::Index n = traj.states.front().size();
  const Eigen::Index m = traj.controls.empty() ? 0 : traj.controls.front().size();
  std::ostringstream out;
  out << 'k';
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
  for (Eigen::Index j = 1; j <= m; ++j) out << ",u" << j;
  out << ",stage_cost,discounted_cumcost,decay_ok,rdp_ok,contract_ok\n";
  auto flag = [](const std::optional<bool>& f) -> const char* {
    if (!f) return "";
    return *f ? "1" : "0";
  };
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(traj.states[k](i));
    for (Eigen::Index j = 0; j < m; ++j) out << ',' << format_double(traj.controls[k](j));
    out << ',' << format_double(traj.stage_costs[k]) << ','
        << format_double(traj.discounted_cumcost[k]);
    const StepFlags& f = k < traj.flags.size() ? traj.flags[k] : StepFlags{};
    out << ',' << flag(f.decay_ok) << ',' << flag(f.rdp_ok) << ',' << flag(f.contract_ok)
        << '\n';
  }
  return out.str();
}

namespace {

std::string num(double v) {
  return std::isfinite(v) ? format_double(v) : json_string(format_double(v));
}

std::string stats_json(const InequalityStats& s) {
  return "{\"checked\":" + std::to_string(s.checked) +
         ",\"violated\":" + std::to_string(s.violated) +
         ",\"worst_margin\":" + num(s.worst_margin) + "}";
}

}  // namespace

std::string report_to_json(const VerificationReport& r) {
  std::ostringstream out;
  out << "{\"x0\":" << format_vector_json(r.x0)
      << ",\"status\":" << json_string(r.status)
      << ",\"in_level_set\":" << (r.in_level_set ? "true" : "false")
      << ",\"certified\":" << (r.certified ? "true" : "false")
      << ",\"diverged\":" << (r.diverged ? "true" : "false")
      << ",\"level_set_exits\":" << r.level_set_exits
      << ",\"decay\":" << stats_json(r.decay)
      << ",\"relaxed_dp\":" << stats_json(r.relaxed_dp)
      << ",\"contraction\":" << stats_json(r.contraction)
      << ",\"suboptimality\":{\"certifiable\":"
      << (r.suboptimality.certifiable ? "true" : "false")
      << ",\"holds\":" << (r.suboptimality.holds ? "true" : "false")
      << ",\"margin\":" << num(r.suboptimality.margin)
      << ",\"truncated_cost\":" << num(r.suboptimality.truncated_cost)
      << ",\"tail_estimate\":" << num(r.suboptimality.tail_estimate) << "}"
      << ",\"certified_violations\":" << r.certified_violations() << "}";
  return out.str();
}

}  // namespace mpcert

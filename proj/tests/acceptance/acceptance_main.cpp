// Acceptance suite: one PASS/FAIL line per criterion, each with its time budget.

#include <mpcert/bounds.hpp>
#include <mpcert/certify.hpp>
#include <mpcert/errors.hpp>
#include <mpcert/format.hpp>
#include <mpcert/ocp.hpp>
#include <mpcert/rng.hpp>
#include <mpcert/simulate.hpp>
#include <mpcert/systems.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace mpcert;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Pendulum {
  SystemPreset preset = make_preset("pendulum");
  StageCost cost{SymMatrix::diagonal((Vector(2) << 10.0, 1.0).finished()),
                 SymMatrix(Matrix::Constant(1, 1, 0.1))};
};

Vector random_in_unit_ball(Lcg64& rng, Eigen::Index n) {
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  return z * (std::pow(rng.uniform(), 1.0 / static_cast<double>(n)) / z.norm());
}

Outcome pendulum_constants() {
  Outcome o;
  Pendulum p;
  const double L = estimate_L(p.preset.surrogate);
  const double B = estimate_B(p.cost, riccati_infinite(p.preset.surrogate, p.cost, 1.0).value);
  o.require(std::abs(L - 1.041) <= 0.005, "L = " + fmt(L));
  o.require(std::abs(B - 9.149) <= 0.05, "B = " + fmt(B));
  if (o.ok) o.detail = "L = " + format_double(L) + ", B = " + format_double(B);
  return o;
}

Outcome thresholds() {
  Outcome o;
  const CertInputs in{1.041, 9.149, 0.0, 1.0, 10.0, 0.1};
  const auto n_min = min_horizon(in, 1.0, {}, 1000);
  const double n_star = 2 * in.B * std::log(in.B);
  o.require(n_min && *n_min == 41, "min_horizon = " + (n_min ? std::to_string(*n_min) : "none"));
  o.require(n_star > 40.0 && n_star < 41.0, "2B log B = " + fmt(n_star));
  // Direct scan of the contraction factor expression.
  long scan = 0;
  for (long n = 2; n <= 1000 && scan == 0; ++n) {
    if (1 + (std::exp(-n / in.B) * in.B - 1 / in.B) < 1) scan = n;
  }
  o.require(scan == 41, "scan oracle = " + std::to_string(scan));
  const double g_star = 1 - 1 / in.B;
  const bool above = evaluate_certificate(in, g_star + 1e-9, Horizon::infinite()).stable;
  const bool below = evaluate_certificate(in, g_star - 1e-9, Horizon::infinite()).stable;
  o.require(above && !below, "discount threshold does not flip at 1 - 1/B");
  if (o.ok) o.detail = "N_min = 41, 2B log B = " + fmt(n_star) + ", flip at gamma = " + fmt(g_star);
  return o;
}

Outcome envelope() {
  Outcome o;
  const double gamma = 1.0, L = 1.1, B = 10.0;
  std::size_t comparisons = 0;
  for (int i = 0; i < 50; ++i) {
    const double s = 0.5 * i / 49.0;
    const double env = kappa_uniform(gamma, L, B, s, EnvelopeConfig{10000}).value;
    for (long n = 1; n <= 50; ++n) {
      const double shifted = kappa_gn(gamma, L, B, n, s) + F_n0(B, n) * (s + 1.0) * (s + 1.0);
      o.require(env <= shifted, "envelope above N = " + std::to_string(n) + " at s = " + fmt(s));
      ++comparisons;
    }
  }
  const double at_zero = kappa_uniform(gamma, L, B, 0.0, EnvelopeConfig{10000}).value;
  o.require(at_zero <= 1e-6, "kappa(0) = " + fmt(at_zero));
  if (o.ok) o.detail = std::to_string(comparisons) + " comparisons, kappa(0) = " + fmt(at_zero);
  return o;
}

Outcome index_shapes() {
  Outcome o;
  Pendulum p;
  const CertInputs base = cert_inputs_for(p.preset.surrogate, p.cost, 0.0);

  const CertInputs in = base.with_p_bar(5e-5);
  std::vector<double> fixed, uniform;
  for (long n = 2; n <= 300; ++n) {
    fixed.push_back(alpha_index_fixed_horizon(in, 1.0, Horizon::finite(n)));
    uniform.push_back(alpha_index(in, 1.0, Horizon::finite(n)));
  }
  std::size_t peak = 0;
  for (std::size_t i = 1; i < fixed.size(); ++i) {
    if (fixed[i] > fixed[peak]) peak = i;
  }
  o.require(peak > 0 && peak + 1 < fixed.size(), "fixed-horizon index does not rise then fall");
  o.require(fixed.back() < 0.0, "fixed-horizon index at N = 300 is " + fmt(fixed.back()));
  for (std::size_t i = 1; i < uniform.size(); ++i) {
    o.require(uniform[i] >= uniform[i - 1], "uniform index decreases at N = " + std::to_string(i + 2));
  }
  const double limit = 1 - in.B * kappa_tilde(in, 1.0, in.p_bar);
  o.require(std::abs(uniform.back() - limit) <= 1e-9,
            "uniform index at N = 300 is " + fmt(std::abs(uniform.back() - limit)) + " from its limit");

  const CertInputs tiny = base.with_p_bar(1e-12);
  double worst = 0.0;
  for (long n = 2; n <= 300; ++n) {
    worst = std::max(worst, std::abs(alpha_index_fixed_horizon(tiny, 1.0, Horizon::finite(n)) -
                                     alpha_index(tiny, 1.0, Horizon::finite(n))));
  }
  o.require(worst <= 1e-6, "indices differ by " + fmt(worst) + " at p_bar = 1e-12");
  if (o.ok) {
    o.detail = "peak at N = " + std::to_string(peak + 2) + ", fixed(300) = " + fmt(fixed.back()) +
               ", tiny-mismatch gap " + fmt(worst);
  }
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  Lcg64 rng(2024);
  const StageCost unit(SymMatrix::identity(2), SymMatrix::identity(1));
  double worst_gap = 0.0;
  int systems = 0;
  while (systems < 20) {
    Matrix a(2, 2), b(2, 1);
    for (Eigen::Index i = 0; i < 2; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) a(i, j) = rng.uniform(-1.2, 1.2);
      b(i, 0) = rng.uniform(-1.0, 1.0);
    }
    const LinearSystem sys(a, b);
    try {
      riccati_infinite(sys, unit, 1.0);
    } catch (const NonStabilizableError&) {
      continue;
    }
    const long N = 2 + systems % 4;
    const OCPParams params(1.0, Horizon::finite(N));
    Vector x0(2);
    x0 << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    const double v = eval_value(riccati_finite(sys, unit, params).value, x0);
    const double shot = solve_shooting(linear_plant(sys), unit, params, x0, 3, 7 + systems).cost;
    const double gap = std::abs(shot - v) / v;
    worst_gap = std::max(worst_gap, gap);
    o.require(gap <= 1e-3, "system " + std::to_string(systems) + " gap " + fmt(gap));
    ++systems;
  }

  Pendulum p;
  const OCPParams params(1.0, Horizon::finite(10));
  const auto v = riccati_finite(p.preset.surrogate, p.cost, params).value;
  Lcg64 states(99);
  double worst_residual = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector x = random_in_unit_ball(states, 2);
    const double r = bellman_residual(p.preset.surrogate, p.cost, params, x, 21) /
                     (1 + eval_value(v, x));
    worst_residual = std::max(worst_residual, r);
  }
  o.require(worst_residual <= 1e-8, "Bellman residual " + fmt(worst_residual));
  if (o.ok) {
    o.detail = "max gap " + fmt(worst_gap) + ", max normalized residual " + fmt(worst_residual);
  }
  return o;
}

Outcome closed_loop_verification() {
  Outcome o;
  Pendulum p;
  const Region region = Region::ball(1e-3);
  const auto est = estimate_mismatch(linear_plant(p.preset.surrogate, "surrogate"), p.preset.plant,
                                     region, ControlSet::symmetric_box(1, 1.0), 9, 1);
  const auto bundle = build_certificate(p.preset.surrogate, p.cost, 1.0, Horizon::finite(41),
                                        est.p_bar, region);
  o.require(bundle.certificate.stable, "configuration not certified, A = " + fmt(bundle.certificate.A));
  std::size_t violations = 0, checked = 0, outside = 0;
  for (const auto& x0 : sample_in_level_set(bundle.level_set, 50, 17)) {
    Trajectory t = rollout(p.preset.plant, bundle.gain, p.cost, x0, 1.0, 200);
    const auto rep = verify_closed_loop(t, bundle, p.cost, region);
    outside += !rep.in_level_set;
    violations += rep.decay.violated + rep.relaxed_dp.violated + rep.contraction.violated +
                  (rep.suboptimality.holds ? 0 : 1);
    checked += rep.decay.checked + rep.relaxed_dp.checked + rep.contraction.checked + 1;
  }
  o.require(outside == 0, std::to_string(outside) + " initial states outside the level set");
  o.require(violations == 0, std::to_string(violations) + " violations");
  if (o.ok) {
    o.detail = "p_bar = " + fmt(est.p_bar) + ", A = " + fmt(bundle.certificate.A) + ", " +
               std::to_string(checked) + " checks, 0 violations";
  }
  return o;
}

Outcome surrogate_decay() {
  Outcome o;
  Pendulum p;
  const double B = estimate_B(p.cost, riccati_infinite(p.preset.surrogate, p.cost, 1.0).value);
  Lcg64 rng(40);
  std::size_t checked = 0;
  for (int i = 0; i < 20; ++i) {
    const Vector x0 = random_in_unit_ball(rng, 2);
    const auto chk = verify_surrogate_decay(p.preset.surrogate, p.cost,
                                            OCPParams(1.0, Horizon::finite(40)), x0, B);
    o.require(chk.result.violated == 0, "violation for initial state " + std::to_string(i));
    checked += chk.result.checked;
  }
  if (o.ok) o.detail = std::to_string(checked) + " steps, 0 violations";
  return o;
}

Outcome degenerate_inputs() {
  Outcome o;
  Pendulum p;
  const auto& sys = p.preset.surrogate;

  // B = 1
  o.require(M_gn(0.9, 1.3, 1.0, 7) == 1.0, "M with B = 1");
  o.require(F_n0(1.0, 1) == 1.0 && F_n0(1.0, 2) == 0.0, "F with B = 1");
  for (double s : {0.0, 0.1, 0.7}) {
    const double h1 = s * s + 2 * s + (s + 1) * (s + 1);
    const double k2 = (1 + 0.9 * 1.3 * 1.3) * s * s + 2 * s;
    o.require(kappa_uniform(0.9, 1.3, 1.0, s).value == std::min(h1, k2),
              "envelope with B = 1 at s = " + fmt(s));
  }
  o.require(verify_surrogate_decay(sys, p.cost, OCPParams(1.0, Horizon::finite(3)),
                                   Vector::Ones(2), 1.0)
                .degenerate,
            "B = 1 surrogate decay not flagged");

  // p_bar = 0
  const CertInputs in0{1.041, 9.149, 0.0, 1.0, 10.0, 0.1};
  o.require(alpha_index(in0, 1.0, Horizon::infinite()) == 1.0, "alpha at p_bar = 0, N = inf");
  o.require(kappa_tilde(in0, 1.0, 0.0) == kappa_uniform(1.0, 1.041, 9.149, 0.0).value,
            "kappa~(0) differs from kappa(0)");

  // s = 0
  o.require(kappa_gn(1.0, 1.1, 10.0, 3, 0.0) == 0.0, "kappa_N(0)");
  o.require(kappa_uniform(1.0, 1.1, 10.0, 0.0).value <= F_n0(10.0, 10000) + 0.0,
            "kappa(0) above the cap residual");

  // x0 = 0
  const Vector zero = Vector::Zero(2);
  const auto gain = riccati_finite(sys, p.cost, OCPParams(1.0, Horizon::finite(41)));
  const Trajectory t = rollout(p.preset.plant, gain.gain, p.cost, zero, 1.0, 200);
  o.require(t.steps() == 1 && t.discounted_cost == 0.0 && t.states.back().norm() == 0.0,
            "rollout from the origin");
  o.require(eval_value(gain.value, zero) == 0.0, "V(0)");
  const auto shot = solve_shooting(p.preset.plant, p.cost, OCPParams(1.0, Horizon::finite(5)),
                                   zero, 2, 1);
  o.require(shot.cost == 0.0, "shooting from the origin");
  for (const auto& u : shot.controls) o.require(u.norm() == 0.0, "nonzero shooting control");
  const auto cert = evaluate_certificate(in0, 1.0, Horizon::finite(41));
  o.require(verify_suboptimality(t, gain.value, cert, p.cost).holds, "suboptimality at origin");

  // N = 1
  const auto one = riccati_finite(sys, p.cost, OCPParams(1.0, Horizon::finite(1)));
  o.require(one.value.P.matrix() == p.cost.Q().matrix(), "P_1 = Q");
  o.require(one.gain.K == Matrix::Zero(1, 2), "K_1 = 0");
  o.require(K_gn(0.8, 2.0, 1) == 1.0, "K with N = 1");
  o.require(M_gn(0.8, 2.0, 9.0, 1) == 3.0, "M with N = 1");
  for (double s : {0.0, 0.2, 1.5}) {
    o.require(kappa_gn(0.8, 2.0, 9.0, 1, s) == s * s + 2 * std::sqrt(9.0) * s, "kappa_1");
  }
  o.require(bellman_residual(sys, p.cost, OCPParams(1.0, Horizon::finite(1)),
                             (Vector(2) << 0.3, -0.2).finished(), 11) == 0.0,
            "Bellman residual with N = 1");
  if (o.ok) o.detail = "B = 1, p_bar = 0, s = 0, x0 = 0 and N = 1 exact";
  return o;
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"pendulum constants L and B", 1.0, pendulum_constants},
      {"horizon and discount stability thresholds", 1.0, thresholds},
      {"envelope lies below every shifted curve", 5.0, envelope},
      {"fixed-horizon versus uniform suboptimality index", 30.0, index_shapes},
      {"shooting and Riccati agree; Bellman residuals", 60.0, oracle_equivalence},
      {"closed-loop verification on the nonlinear plant", 60.0, closed_loop_verification},
      {"surrogate-optimal decay bound", 10.0, surrogate_decay},
      {"degenerate inputs give exact values", 60.0, degenerate_inputs},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.ok && secs >= c.budget_s) {
      o.ok = false;
      o.detail = "took " + fmt(secs) + " s, budget " + fmt(c.budget_s) + " s";
    }
    failed += !o.ok;
    std::printf("%s  %-50s %8.3f s  %s\n", o.ok ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}

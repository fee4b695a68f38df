#include "mpcert_cli/commands.hpp"

#include <mpcert/certify.hpp>
#include <mpcert/format.hpp>
#include <mpcert/parallel.hpp>
#include <mpcert/rng.hpp>
#include <mpcert/simulate.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <ostream>
#include <sstream>

namespace mpcert::cli {

namespace {

std::string num(double v) {
  return std::isfinite(v) ? format_double(v) : json_string(format_double(v));
}

double resolved_p_bar(const RunConfig& cfg, const Problem& pb) {
  if (!cfg.estimate_p_bar) return cfg.p_bar;
  const auto surrogate = linear_plant(pb.surrogate, "surrogate");
  const auto controls = ControlSet::symmetric_box(pb.surrogate.control_dim(), cfg.mismatch.u_bound);
  try {
    return estimate_mismatch(surrogate, pb.plant, pb.region, controls, cfg.mismatch.grid, cfg.seed)
        .p_bar;
  } catch (const UnsupportedRegionError&) {
    throw ConfigError("config key \"p_bar\": \"estimate\" needs a bounded region");
  }
}

// Estimated inputs with the user's L and B overrides applied.
CertInputs inputs_for(const RunConfig& cfg, const Problem& pb, double p_bar) {
  CertInputs in = cert_inputs_for(pb.surrogate, pb.cost, p_bar);
  if (cfg.L) in.L = *cfg.L;
  if (cfg.B) in.B = *cfg.B;
  in.validate();
  return in;
}

CertificateBundle bundle_for(const RunConfig& cfg, const Problem& pb, double p_bar) {
  CertificateBundle b =
      build_certificate(pb.surrogate, pb.cost, cfg.gamma, cfg.horizon, p_bar, pb.region, pb.envelope);
  if (cfg.L || cfg.B) {
    const Certificate old = b.certificate;
    b.certificate = evaluate_certificate(inputs_for(cfg, pb, p_bar), cfg.gamma, cfg.horizon,
                                         pb.envelope);
    b.certificate.level_set_c = old.level_set_c;
    b.certificate.justification = old.justification;
  }
  return b;
}

std::vector<Vector> initial_states(const std::vector<Vector>& explicit_states,
                                   std::size_t count, const std::function<std::vector<Vector>()>& draw) {
  std::vector<Vector> out = explicit_states;
  if (count > 0) {
    const auto drawn = draw();
    out.insert(out.end(), drawn.begin(), drawn.end());
  }
  return out;
}

void check_dims(const std::vector<Vector>& xs, Eigen::Index n, const std::string& key) {
  for (const auto& x : xs) {
    if (x.size() != n) {
      throw ConfigError("config key \"" + key + "\": states must have dimension " +
                        std::to_string(n));
    }
  }
}

}  // namespace

int cmd_certify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Problem pb = resolve(cfg);
  const double p_bar = resolved_p_bar(cfg, pb);
  const CertificateBundle b = bundle_for(cfg, pb, p_bar);
  out << certificate_to_json(b.certificate) << '\n';
  if (!b.certificate.stable) {
    err << "not stable: A = " << format_double(b.certificate.A) << " >= 1\n";
    return kExitNotStable;
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.sweep.empty()) throw ConfigError("config key \"sweep\": no sweep grid given");
  const Problem pb = resolve(cfg);
  const CertInputs base = inputs_for(cfg, pb, cfg.p_bar);
  const std::vector<Horizon> ns = cfg.sweep.N.empty() ? std::vector{cfg.horizon} : cfg.sweep.N;
  const std::vector<double> gammas =
      cfg.sweep.gamma.empty() ? std::vector{cfg.gamma} : cfg.sweep.gamma;
  const std::vector<double> ps =
      cfg.sweep.p_bar.empty() ? std::vector{resolved_p_bar(cfg, pb)} : cfg.sweep.p_bar;
  for (const auto& n : ns) {
    if (!n.is_infinite() && n.value() < 2) {
      throw ConfigError("config key \"sweep.N\": horizons must be >= 2");
    }
  }
  for (double p : ps) {
    if (!(p >= 0.0)) throw ConfigError("config key \"sweep.p_bar\": entries must be >= 0");
  }

  // Rows ordered p_bar, gamma, N so each curve is contiguous.
  const std::size_t rows = ns.size() * gammas.size() * ps.size();
  std::vector<std::string> lines(rows);
  parallel_for(rows, [&](std::size_t i) {
    const Horizon& n = ns[i % ns.size()];
    const double g = gammas[(i / ns.size()) % gammas.size()];
    const double p = ps[i / (ns.size() * gammas.size())];
    const CertInputs in = base.with_p_bar(p);
    const Certificate c = evaluate_certificate(in, g, n, pb.envelope);
    const double fixed = alpha_index_fixed_horizon(in, g, n);
    lines[i] = n.to_string() + ',' + format_double(g) + ',' + format_double(p) + ',' +
               format_double(c.alpha) + ',' + format_double(fixed) + ',' + format_double(c.A) +
               ',' + (c.stable ? "1" : "0") + '\n';
  });
  out << "# comparison index of the certainty-equivalence analysis omitted: its formula is "
         "not part of this bound\n";
  out << "N,gamma,p_bar,alpha_uniform,alpha_fixedN,A,stable\n";
  for (const auto& l : lines) out << l;
  err << "sweep: " << rows << " rows, L = " << format_double(base.L)
      << ", B = " << format_double(base.B) << '\n';
  return kExitOk;
}

int cmd_kappa(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const KappaSpec& k = cfg.kappa;
  if (k.s.empty()) throw ConfigError("config key \"kappa.s\": the s grid is empty");
  const double gamma = k.gamma.value_or(cfg.gamma);
  double L = 0.0, B = 1.0;
  if (k.L && k.B) {
    L = *k.L;
    B = *k.B;
  } else {
    const Problem pb = resolve(cfg);
    const CertInputs in = inputs_for(cfg, pb, 0.0);
    L = k.L.value_or(in.L);
    B = k.B.value_or(in.B);
  }
  if (!(B >= 1.0)) throw ConfigError("config key \"kappa.B\": must be >= 1");
  if (!(L >= 0.0)) throw ConfigError("config key \"kappa.L\": must be >= 0");
  const EnvelopeConfig env{cfg.envelope_cap};

  std::vector<std::string> lines(k.s.size());
  std::vector<long> argmins(k.s.size());
  std::vector<char> warned(k.s.size(), 0);
  parallel_for(k.s.size(), [&](std::size_t i) {
    const double s = k.s[i];
    std::string line = format_double(s);
    for (long n : k.N) line += ',' + format_double(kappa_gn(gamma, L, B, n, s));
    const EnvelopeValue v = kappa_uniform(gamma, L, B, s, env);
    line += ',' + format_double(v.value) + ',' + std::to_string(v.argmin_n0) + '\n';
    lines[i] = std::move(line);
    argmins[i] = v.argmin_n0;
    warned[i] = v.cap_warning;
  });

  out << 's';
  for (long n : k.N) out << ",kappa_N" << n;
  out << ",kappa_uniform,argmin_n0\n";
  for (const auto& l : lines) out << l;

  for (std::size_t i = 0; i < k.s.size(); ++i) {
    if (warned[i]) {
      err << "warning: envelope cap " << env.n0_cap << " reached at s = " << format_double(k.s[i])
          << "; the infimum may lie lower\n";
    }
  }
  // Reported, never asserted: monotonicity of the minimizer is not proved.
  bool monotone = true;
  for (std::size_t i = 1; i < k.s.size(); ++i) {
    if (k.s[i] >= k.s[i - 1] && argmins[i] > argmins[i - 1]) {
      monotone = false;
      err << "observation: argmin_n0 increases from " << argmins[i - 1] << " to " << argmins[i]
          << " at s = " << format_double(k.s[i]) << '\n';
    }
  }
  if (monotone) err << "observation: argmin_n0 is nonincreasing in s on this grid\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Problem pb = resolve(cfg);
  const double p_bar = resolved_p_bar(cfg, pb);
  const CertificateBundle b = bundle_for(cfg, pb, p_bar);
  const double fallback = pb.region.kind() == Region::Kind::kBall ? pb.region.radius() : 1.0;
  const auto x0s = initial_states(cfg.simulate.initial_states, cfg.simulate.count, [&] {
    return sample_in_level_set(b.level_set, cfg.simulate.count, cfg.seed, fallback);
  });
  if (x0s.empty()) {
    throw ConfigError("config key \"simulate\": give initial_states or a positive count");
  }
  check_dims(x0s, pb.surrogate.state_dim(), "simulate.initial_states");

  std::vector<VerificationReport> reports(x0s.size());
  std::vector<std::string> csvs(x0s.size());
  parallel_for(x0s.size(), [&](std::size_t i) {
    Trajectory t = rollout(pb.plant, b.gain, pb.cost, x0s[i], cfg.gamma, cfg.simulate.steps);
    reports[i] = verify_closed_loop(t, b, pb.cost, pb.region);
    if (cfg.simulate.trajectory_dir) csvs[i] = trajectory_to_csv(t);
  });

  if (cfg.simulate.trajectory_dir) {
    const std::filesystem::path dir(*cfg.simulate.trajectory_dir);
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < csvs.size(); ++i) {
      const auto path = dir / ("trajectory_" + std::to_string(i) + ".csv");
      std::ofstream f(path);
      if (!f) throw std::runtime_error("cannot write " + path.string());
      f << csvs[i];
    }
  }

  std::size_t verified = 0, unverifiable = 0, violated = 0, diverged = 0, violations = 0;
  for (const auto& r : reports) {
    verified += r.status == "verified";
    unverifiable += r.status.rfind("unverifiable", 0) == 0;
    violated += r.status == "violated";
    diverged += r.diverged;
    violations += r.certified_violations();
  }
  out << "{\"p_bar\":" << num(p_bar) << ",\"certificate\":" << certificate_to_json(b.certificate)
      << ",\"summary\":{\"runs\":" << reports.size() << ",\"verified\":" << verified
      << ",\"unverifiable\":" << unverifiable << ",\"violated\":" << violated
      << ",\"diverged\":" << diverged << ",\"certified_violations\":" << violations
      << ",\"status\":"
      << json_string(b.certificate.stable ? "certified" : "uncertified: A >= 1") << "},\"runs\":[";
  for (std::size_t i = 0; i < reports.size(); ++i) out << (i ? "," : "") << report_to_json(reports[i]);
  out << "]}\n";

  if (!b.certificate.stable) err << "uncertified: A = " << format_double(b.certificate.A) << " >= 1\n";
  if (violations > 0) {
    err << "violation: " << violations << " certified inequality violations in " << violated
        << " runs\n";
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.horizon.is_infinite() || cfg.horizon.value() > 12) {
    throw ConfigError("config key \"horizon\": the oracle needs a finite N <= 12");
  }
  const Problem pb = resolve(cfg);
  const OCPParams params(cfg.gamma, cfg.horizon);
  const long N = cfg.horizon.value();
  const RiccatiSolution ric = riccati_finite(pb.surrogate, pb.cost, params);
  const PlantModel surrogate = linear_plant(pb.surrogate, "surrogate");
  const Eigen::Index n = pb.surrogate.state_dim();

  Lcg64 rng(cfg.seed);
  auto draw_ball = [&](std::size_t count, double radius) {
    std::vector<Vector> xs;
    for (std::size_t i = 0; i < count; ++i) {
      Vector z(n);
      for (Eigen::Index j = 0; j < n; ++j) z(j) = rng.normal();
      xs.push_back(z * (radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n)) / z.norm()));
    }
    return xs;
  };
  const auto x0s = initial_states(cfg.oracle.initial_states, cfg.oracle.count,
                                  [&] { return draw_ball(cfg.oracle.count, cfg.oracle.radius); });
  check_dims(x0s, n, "oracle.initial_states");
  const auto bellman_states = draw_ball(cfg.oracle.bellman_samples, 1.0);

  struct Row {
    double shooting = 0, riccati = 0, gap = 0, plant_shooting = 0, plant_lqr = 0;
  };
  std::vector<Row> rows(x0s.size());
  const bool nonlinear = pb.plant.name() != "surrogate" && pb.plant.name() != "pendulum-linear";
  parallel_for(x0s.size(), [&](std::size_t i) {
    const Vector& x0 = x0s[i];
    Row r;
    const std::uint64_t seed = cfg.seed + 1000 * (i + 1);
    r.shooting = solve_shooting(surrogate, pb.cost, params, x0, cfg.oracle.restarts, seed).cost;
    r.riccati = eval_value(ric.value, x0);
    const double scale = std::max(std::abs(r.riccati), std::abs(r.shooting));
    r.gap = scale == 0.0 ? 0.0 : std::abs(r.shooting - r.riccati) / scale;
    if (nonlinear) {
      r.plant_shooting =
          solve_shooting(pb.plant, pb.cost, params, x0, cfg.oracle.restarts, seed).cost;
      std::vector<Vector> us;
      Vector x = x0;
      for (long k = 0; k < N; ++k) {
        us.push_back(ric.gain(x));
        x = pb.plant(x, us.back());
      }
      r.plant_lqr = open_loop_cost(pb.plant, pb.cost, cfg.gamma, x0, us);
    }
    rows[i] = r;
  });

  double worst_residual = 0.0, worst_normalized = 0.0;
  for (const auto& x : bellman_states) {
    const double res = bellman_residual(pb.surrogate, pb.cost, params, x, cfg.oracle.u_grid);
    worst_residual = std::max(worst_residual, res);
    worst_normalized = std::max(worst_normalized, res / (1.0 + eval_value(ric.value, x)));
  }

  double worst_gap = 0.0;
  out << "{\"N\":" << N << ",\"gamma\":" << num(cfg.gamma) << ",\"runs\":[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    worst_gap = std::max(worst_gap, r.gap);
    out << (i ? "," : "") << "{\"x0\":" << format_vector_json(x0s[i])
        << ",\"shooting_cost\":" << num(r.shooting) << ",\"riccati_cost\":" << num(r.riccati)
        << ",\"relative_gap\":" << num(r.gap);
    if (nonlinear) {
      out << ",\"plant\":{\"shooting_cost\":" << num(r.plant_shooting)
          << ",\"lqr_rollout_cost\":" << num(r.plant_lqr)
          << ",\"shooting_not_worse\":" << (r.plant_shooting <= r.plant_lqr ? "true" : "false")
          << "}";
    }
    out << "}";
  }
  out << "],\"max_relative_gap\":" << num(worst_gap)
      << ",\"bellman\":{\"samples\":" << bellman_states.size()
      << ",\"max_residual\":" << num(worst_residual)
      << ",\"max_normalized_residual\":" << num(worst_normalized) << "},\"heuristic\":true}\n";
  err << "oracle: " << rows.size() << " initial states, max relative gap "
      << format_double(worst_gap) << '\n';
  return kExitOk;
}

}  // namespace mpcert::cli

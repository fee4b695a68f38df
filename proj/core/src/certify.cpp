#include "mpcert/certify.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

#include "mpcert/errors.hpp"
#include "mpcert/format.hpp"
#include "mpcert/rng.hpp"

namespace mpcert {

double estimate_L(const LinearSystem& sys) { return spectral_norm(sys.A); }

double estimate_L_sampled(const PlantModel& f, const Region& region,
                          const ControlSet& controls, int samples, std::uint64_t seed) {
  if (!region.bounded() || !controls.bounded()) {
    throw UnsupportedRegionError("estimate_L_sampled: needs a bounded region and a box U");
  }
  const Eigen::Index n = f.state_dim();
  const Eigen::Index m = f.control_dim();
  Lcg64 rng(seed);
  auto draw_state = [&] {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = region.kind() == Region::Kind::kBall ? region.radius()
                                                            : region.half_widths()(i);
      x(i) = rng.uniform(-w, w);
    }
    return x;
  };
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vector x = draw_state();
    const Vector y = draw_state();
    Vector u(m);
    for (Eigen::Index j = 0; j < m; ++j) u(j) = rng.uniform(controls.lo()(j), controls.hi()(j));
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    best = std::max(best, (f(x, u) - f(y, u)).norm() / dist);
  }
  return best;
}

double estimate_B(const StageCost& cost, const QuadValueFunction& p_inf) {
  const Matrix lq = cholesky(cost.Q());
  if (p_inf.P.dim() != cost.Q().dim()) throw ValidationError("estimate_B: dimension mismatch");
  const auto tri = lq.triangularView<Eigen::Lower>();
  // Lq^{-1} P Lq^{-T}
  const Matrix left = tri.solve(p_inf.P.matrix());
  const Matrix reduced = tri.solve(left.transpose()).transpose();
  const double B = eig_extremes(SymMatrix::symmetrized(reduced)).lambda_max;
  if (B < 1.0 - 1e-9) {
    throw ConsistencyError("estimate_B: B = " + format_double(B) +
                           " < 1; the value form does not dominate Q");
  }
  return std::max(B, 1.0);
}

LevelSet largest_level_set(const SymMatrix& P, const Region& region) {
  LevelSet ls;
  ls.P = P;
  if (!region.bounded()) return ls;
  if (region.kind() == Region::Kind::kBox && region.half_widths().size() != P.dim()) {
    throw ValidationError("largest_level_set: region dimension mismatch");
  }
  Matrix l;
  try {
    l = cholesky(P);
  } catch (const DefinitenessError&) {
    throw DegenerateLevelSetError(
        "largest_level_set: P is singular but the region is bounded");
  }
  if (region.kind() == Region::Kind::kBall) {
    ls.c_bar = region.radius() * region.radius() * eig_extremes(P).lambda_min;
    return ls;
  }
  // Support function of the ellipsoid along e_i is sqrt(c (P^{-1})_ii).
  const Matrix p_inv = l.triangularView<Eigen::Lower>().solve(
      l.triangularView<Eigen::Lower>().solve(Matrix::Identity(P.dim(), P.dim())).transpose());
  double c = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < P.dim(); ++i) {
    const double r = region.half_widths()(i);
    c = std::min(c, r * r / p_inv(i, i));
  }
  ls.c_bar = c;
  return ls;
}

namespace {

CertInputs inputs_from(const LinearSystem& surrogate, const StageCost& cost, double p_bar,
                       const QuadValueFunction& value_inf) {
  CertInputs in;
  in.L = estimate_L(surrogate);
  in.B = estimate_B(cost, value_inf);
  in.p_bar = p_bar;
  const auto q = eig_extremes(cost.Q());
  in.lambda_min_Q = q.lambda_min;
  in.lambda_max_Q = q.lambda_max;
  in.lambda_min_R = eig_extremes(cost.R()).lambda_min;
  in.validate();
  return in;
}

}  // namespace

CertInputs cert_inputs_for(const LinearSystem& surrogate, const StageCost& cost,
                           double p_bar) {
  return inputs_from(surrogate, cost, p_bar, riccati_infinite(surrogate, cost, 1.0).value);
}

CertificateBundle build_certificate(const LinearSystem& surrogate, const StageCost& cost,
                                    double gamma, const Horizon& N, double p_bar,
                                    const Region& region, const EnvelopeConfig& cfg) {
  // B is defined through the undiscounted infinite-horizon value, whatever gamma is.
  const RiccatiSolution undiscounted = riccati_infinite(surrogate, cost, 1.0);
  const CertInputs in = inputs_from(surrogate, cost, p_bar, undiscounted.value);

  CertificateBundle bundle;
  bundle.certificate = evaluate_certificate(in, gamma, N, cfg);
  const RiccatiSolution sol = solve_lq(surrogate, cost, OCPParams(gamma, N));
  bundle.value = sol.value;
  bundle.gain = sol.gain;
  bundle.value_inf = undiscounted.value;
  bundle.level_set = largest_level_set(sol.value.P, region);
  bundle.certificate.level_set_c = bundle.level_set.c_bar;
  bundle.certificate.justification = region.bounded() ? "levelset" : "global_S";
  return bundle;
}

std::string certificate_to_json(const Certificate& c) {
  std::ostringstream out;
  auto num = [](double v) {
    return std::isfinite(v) ? format_double(v) : json_string(format_double(v));
  };
  out << "{\"L\":" << num(c.inputs.L) << ",\"B\":" << num(c.inputs.B)
      << ",\"p_bar\":" << num(c.inputs.p_bar) << ",\"gamma\":" << num(c.gamma)
      << ",\"horizon\":"
      << (c.horizon.is_infinite() ? std::string("\"inf\"") : c.horizon.to_string())
      << ",\"kappa_tilde\":" << num(c.kappa_tilde_val) << ",\"alpha\":" << num(c.alpha)
      << ",\"A\":" << num(c.A) << ",\"stable\":" << (c.stable ? "true" : "false")
      << ",\"level_set_c\":" << num(c.level_set_c)
      << ",\"justification\":" << json_string(c.justification) << "}";
  return out.str();
}

Certificate certificate_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("certificate JSON: ") + e.what());
  }
  auto num = [&](const char* key) -> double {
    if (!j.contains(key)) throw ValidationError(std::string("certificate JSON: missing ") + key);
    const auto& v = j.at(key);
    if (v.is_string()) return parse_double(v.get<std::string>());
    if (!v.is_number()) throw ValidationError(std::string("certificate JSON: bad ") + key);
    return v.get<double>();
  };
  Certificate c;
  c.inputs.L = num("L");
  c.inputs.B = num("B");
  c.inputs.p_bar = num("p_bar");
  c.gamma = num("gamma");
  const auto& h = j.at("horizon");
  c.horizon = h.is_string() ? Horizon::infinite() : Horizon::finite(h.get<long>());
  c.kappa_tilde_val = num("kappa_tilde");
  c.alpha = num("alpha");
  c.A = num("A");
  c.stable = j.at("stable").get<bool>();
  c.level_set_c = num("level_set_c");
  c.justification = j.at("justification").get<std::string>();
  return c;
}

}  // namespace mpcert

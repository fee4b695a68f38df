#include "mpcert/bounds.hpp"

#include <cmath>
#include <string>

#include "mpcert/errors.hpp"

namespace mpcert {

void CertInputs::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("CertInputs: " + what); };
  if (!(L >= 0.0) || !std::isfinite(L)) fail("L must be finite and >= 0");
  if (!(B >= 1.0) || !std::isfinite(B)) fail("B must be finite and >= 1");
  if (!(p_bar >= 0.0) || !std::isfinite(p_bar)) fail("p_bar must be finite and >= 0");
  if (!(lambda_min_Q > 0.0 && lambda_min_Q <= lambda_max_Q)) {
    fail("need 0 < lambda_min(Q) <= lambda_max(Q)");
  }
  if (!(lambda_min_R > 0.0)) fail("lambda_min(R) must be positive");
}

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
}

void check_horizon(long n) {
  if (n < 1) throw ValidationError("horizon must be >= 1");
}

double k_ratio(double gamma, double L) { return gamma * L * L; }

double m_ratio(double gamma, double L, double B) {
  return std::sqrt(gamma * (1.0 - 1.0 / B)) * L;
}

// Running sum of ratio^k, k < n. kappa_uniform repeats exactly these
// operations so its envelope terms match kappa_gn bit for bit.
double geometric_sum(double ratio, long n) {
  double sum = 0.0;
  double term = 1.0;
  for (long k = 0; k < n; ++k) {
    sum += term;
    term *= ratio;
  }
  return sum;
}

void require_min_horizon(const Horizon& N) {
  if (!N.is_infinite() && N.value() < 2) {
    throw ValidationError("suboptimality index and contraction factor need N >= 2");
  }
}

}  // namespace

double K_gn(double gamma, double L, long N) {
  check_gamma(gamma);
  check_horizon(N);
  return geometric_sum(k_ratio(gamma, L), N);
}

double M_gn(double gamma, double L, double B, long N) {
  check_gamma(gamma);
  check_horizon(N);
  if (!(B >= 1.0)) throw ValidationError("M_gn: B must be >= 1");
  return std::sqrt(B) * geometric_sum(m_ratio(gamma, L, B), N);
}

double F_n0(double B, long n0) {
  if (!(B >= 1.0)) throw ValidationError("F_n0: B must be >= 1");
  check_horizon(n0);
  return std::pow(1.0 - 1.0 / B, static_cast<double>(n0 - 1)) * B * B;
}

double kappa_gn(double gamma, double L, double B, long N, double s) {
  if (!(s >= 0.0)) throw ValidationError("kappa_gn: s must be >= 0");
  const double K = K_gn(gamma, L, N);
  const double M = M_gn(gamma, L, B, N);
  // K overflows for long horizons when gamma L^2 > 1; the value at s = 0 is still 0.
  if (s == 0.0) return 0.0;
  return K * s * s + 2.0 * M * s;
}

std::optional<double> K_inf(double gamma, double L) {
  const double r = k_ratio(gamma, L);
  if (!(r < 1.0)) return std::nullopt;
  return 1.0 / (1.0 - r);
}

std::optional<double> M_inf(double gamma, double L, double B) {
  const double r = m_ratio(gamma, L, B);
  if (!(r < 1.0)) return std::nullopt;
  return std::sqrt(B) / (1.0 - r);
}

EnvelopeValue kappa_uniform(double gamma, double L, double B, double s,
                            const EnvelopeConfig& cfg) {
  check_gamma(gamma);
  if (!(B >= 1.0)) throw ValidationError("kappa_uniform: B must be >= 1");
  if (!(s >= 0.0)) throw ValidationError("kappa_uniform: s must be >= 0");
  if (cfg.n0_cap < 1) throw ValidationError("kappa_uniform: n0_cap must be >= 1");

  const double kr = k_ratio(gamma, L);
  const double mr = m_ratio(gamma, L, B);
  const double shift = (s + 1.0) * (s + 1.0);

  EnvelopeValue out{std::numeric_limits<double>::infinity(), 1, false};
  double k_sum = 0.0, k_term = 1.0;
  double m_sum = 0.0, m_term = 1.0;
  bool stopped = false;
  for (long n0 = 1; n0 <= cfg.n0_cap; ++n0) {
    k_sum += k_term;
    k_term *= kr;
    m_sum += m_term;
    m_term *= mr;
    const double K = k_sum;
    const double M = std::sqrt(B) * m_sum;
    const double kappa = s == 0.0 ? 0.0 : K * s * s + 2.0 * M * s;
    if (kappa >= out.value) {
      stopped = true;
      break;
    }
    const double h = kappa + F_n0(B, n0) * (s + 1.0) * (s + 1.0);
    if (h < out.value) {
      out.value = h;
      out.argmin_n0 = n0;
    }
  }
  if (!stopped && F_n0(B, cfg.n0_cap) * shift > 1e-15 * out.value) out.cap_warning = true;
  return out;
}

double kappa_tilde_scale(const CertInputs& in, double gamma) {
  in.validate();
  check_gamma(gamma);
  const double beta = std::sqrt(1.0 / in.lambda_min_Q) + std::sqrt(in.B / in.lambda_min_R);
  return beta * std::sqrt(in.lambda_max_Q * gamma / in.B);
}

double kappa_tilde(const CertInputs& in, double gamma, double s, const EnvelopeConfig& cfg) {
  return kappa_uniform(gamma, in.L, in.B, kappa_tilde_scale(in, gamma) * s, cfg).value;
}

double horizon_decay(double B, const Horizon& N) {
  if (N.is_infinite()) return 0.0;
  return std::exp(-static_cast<double>(N.value()) / B);
}

double alpha_index(const CertInputs& in, double gamma, const Horizon& N,
                   const EnvelopeConfig& cfg) {
  require_min_horizon(N);
  const double kt = kappa_tilde(in, gamma, in.p_bar, cfg);
  return 1.0 - in.B * in.B * horizon_decay(in.B, N) - in.B * kt;
}

double alpha_index_fixed_horizon(const CertInputs& in, double gamma, const Horizon& N) {
  require_min_horizon(N);
  const double s = kappa_tilde_scale(in, gamma) * in.p_bar;
  double kappa = 0.0;
  if (N.is_infinite()) {
    const auto K = K_inf(gamma, in.L);
    const auto M = M_inf(gamma, in.L, in.B);
    if (!K || !M) return std::numeric_limits<double>::quiet_NaN();
    kappa = *K * s * s + 2.0 * *M * s;
  } else {
    kappa = kappa_gn(gamma, in.L, in.B, N.value(), s);
  }
  return 1.0 - in.B * in.B * horizon_decay(in.B, N) - in.B * kappa;
}

double contraction_factor(const CertInputs& in, double gamma, const Horizon& N,
                          const EnvelopeConfig& cfg) {
  require_min_horizon(N);
  const double kt = kappa_tilde(in, gamma, in.p_bar, cfg);
  return 1.0 + (1.0 / gamma) *
                   (1.0 - gamma + in.B * horizon_decay(in.B, N) + kt - 1.0 / in.B);
}

std::optional<long> min_horizon(const CertInputs& in, double gamma,
                                const EnvelopeConfig& cfg, long n_max) {
  if (n_max < 2) throw ValidationError("min_horizon: n_max must be >= 2");
  // kappa~ does not depend on N; evaluate it once.
  const double kt = kappa_tilde(in, gamma, in.p_bar, cfg);
  for (long n = 2; n <= n_max; ++n) {
    const double A = 1.0 + (1.0 / gamma) * (1.0 - gamma +
                                            in.B * horizon_decay(in.B, Horizon::finite(n)) +
                                            kt - 1.0 / in.B);
    if (A < 1.0) return n;
  }
  return std::nullopt;
}

double max_mismatch(const CertInputs& in, double gamma, const Horizon& N,
                    const EnvelopeConfig& cfg, double tol) {
  if (!(tol > 0.0)) throw ValidationError("max_mismatch: tol must be positive");
  auto stable_at = [&](double p) {
    return contraction_factor(in.with_p_bar(p), gamma, N, cfg) < 1.0;
  };
  if (!stable_at(0.0)) return 0.0;
  double lo = 0.0;
  double hi = tol;
  while (stable_at(hi)) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw ConsistencyError("max_mismatch: no unstable p_bar found");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (stable_at(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

Certificate evaluate_certificate(const CertInputs& in, double gamma, const Horizon& N,
                                 const EnvelopeConfig& cfg) {
  in.validate();
  check_gamma(gamma);
  require_min_horizon(N);
  Certificate c;
  c.inputs = in;
  c.gamma = gamma;
  c.horizon = N;
  c.kappa_tilde_val = kappa_tilde(in, gamma, in.p_bar, cfg);
  c.alpha = 1.0 - in.B * in.B * horizon_decay(in.B, N) - in.B * c.kappa_tilde_val;
  c.A = 1.0 + (1.0 / gamma) *
                  (1.0 - gamma + in.B * horizon_decay(in.B, N) + c.kappa_tilde_val - 1.0 / in.B);
  c.stable = c.A < 1.0;
  return c;
}

}  // namespace mpcert

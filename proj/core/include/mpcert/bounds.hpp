#pragma once

// Closed-form stability and suboptimality constants for MPC under
// proportional plant-model mismatch.
//
//   K_{g,N}      = sum_{k<N} (g L^2)^k
//   M_{g,N}      = sqrt(B) sum_{k<N} (sqrt(g (1 - 1/B)) L)^k
//   F_{N0}       = (1 - 1/B)^{N0 - 1} B^2
//   kappa_{g,N}(s) = K s^2 + 2 M s
//   kappa_g(s)   = inf_{N0} kappa_{g,N0}(s) + F_{N0} (s + 1)^2
//   kappa~_g(s)  = kappa_g(beta sqrt(lmax(Q) g / B) s),
//                  beta = 1/sqrt(lmin(Q)) + sqrt(B / lmin(R))
//   alpha        = 1 - B^2 e^{-N/B} - B kappa~_g(p)
//   A            = 1 + (1 - g + B e^{-N/B} + kappa~_g(p) - 1/B) / g

#include <optional>

#include "mpcert/ocp.hpp"

namespace mpcert {

struct CertInputs {
  double L = 0.0;
  double B = 1.0;
  double p_bar = 0.0;
  double lambda_min_Q = 1.0;
  double lambda_max_Q = 1.0;
  double lambda_min_R = 1.0;

  /// Throws ValidationError when an invariant (B >= 1, L >= 0, p_bar >= 0,
  /// 0 < lambda_min_Q <= lambda_max_Q, lambda_min_R > 0) fails.
  void validate() const;
  CertInputs with_p_bar(double p) const {
    CertInputs c = *this;
    c.p_bar = p;
    return c;
  }
};

struct EnvelopeConfig {
  long n0_cap = 10000;
};

struct EnvelopeValue {
  double value = 0.0;
  long argmin_n0 = 1;
  /// The cap was hit before the early stop fired and F_{cap} was still above
  /// 1e-15 times the best value; the infimum may lie lower.
  bool cap_warning = false;
};

double K_gn(double gamma, double L, long N);
double M_gn(double gamma, double L, double B, long N);
double F_n0(double B, long n0);
double kappa_gn(double gamma, double L, double B, long N, double s);

/// Limits of K and M as N -> infinity. Only defined when the respective
/// ratio is below one (gamma L^2 < 1 for K); std::nullopt otherwise.
std::optional<double> K_inf(double gamma, double L);
std::optional<double> M_inf(double gamma, double L, double B);

/// Exact minimum over N0 in [1, cap]. Stops once kappa_{g,N0}(s) reaches the
/// best value so far: kappa_{g,N0}(s) is nondecreasing in N0 and bounds every
/// later term from below.
EnvelopeValue kappa_uniform(double gamma, double L, double B, double s,
                            const EnvelopeConfig& cfg = {});

/// Rescaling factor beta sqrt(lmax(Q) gamma / B) applied to s by kappa~.
double kappa_tilde_scale(const CertInputs& in, double gamma);
double kappa_tilde(const CertInputs& in, double gamma, double s,
                   const EnvelopeConfig& cfg = {});

/// e^{-N/B}, zero for the infinite horizon.
double horizon_decay(double B, const Horizon& N);

/// Suboptimality index with the horizon-uniform envelope kappa~.
double alpha_index(const CertInputs& in, double gamma, const Horizon& N,
                   const EnvelopeConfig& cfg = {});

/// The same index with kappa_{g,N} in place of kappa_g. At N = infinity it is
/// defined only when the limits of K and M exist; otherwise NaN.
double alpha_index_fixed_horizon(const CertInputs& in, double gamma, const Horizon& N);

double contraction_factor(const CertInputs& in, double gamma, const Horizon& N,
                          const EnvelopeConfig& cfg = {});

/// Smallest N in [2, n_max] with contraction_factor < 1, by exhaustive scan.
std::optional<long> min_horizon(const CertInputs& in, double gamma,
                                const EnvelopeConfig& cfg, long n_max);

/// Largest p_bar keeping contraction_factor < 1, to absolute tolerance tol.
/// Returns 0 when the factor is already >= 1 at p_bar = 0.
double max_mismatch(const CertInputs& in, double gamma, const Horizon& N,
                    const EnvelopeConfig& cfg, double tol);

/// Stability/suboptimality verdict of a parameter triple.
struct Certificate {
  CertInputs inputs;
  double gamma = 1.0;
  Horizon horizon = Horizon::infinite();
  double kappa_tilde_val = 0.0;
  double alpha = 0.0;
  double A = 0.0;
  bool stable = false;
  /// c-bar of the certified level set; +inf when S is all of R^n.
  double level_set_c = std::numeric_limits<double>::infinity();
  /// "levelset": the suboptimality bound rests on A < 1 keeping the state in
  /// the level set. "global_S": S = R^n, so it holds unconditionally.
  std::string justification = "levelset";
};

/// Evaluates kappa~, alpha and A for the given inputs. Level-set fields are
/// left at their defaults.
Certificate evaluate_certificate(const CertInputs& in, double gamma, const Horizon& N,
                                 const EnvelopeConfig& cfg = {});

}  // namespace mpcert

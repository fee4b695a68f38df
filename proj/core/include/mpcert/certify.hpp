#pragma once

#include <cstdint>
#include <string>

#include "mpcert/bounds.hpp"
#include "mpcert/ocp.hpp"
#include "mpcert/systems.hpp"

namespace mpcert {

/// Sublevel set {x : x^T P x <= c_bar}. c_bar = +inf when S is all of R^n.
struct LevelSet {
  double c_bar = std::numeric_limits<double>::infinity();
  SymMatrix P;

  bool contains(const Vector& x) const { return weighted_norm_sq(x, P) <= c_bar; }
};

/// Tight Lipschitz constant of x -> A x + B_u u: the spectral norm of A.
double estimate_L(const LinearSystem& sys);

/// Sampled lower estimate of the Lipschitz constant in x of a black-box
/// surrogate: max over seeded pairs (x, y) in the region, shared u, of
/// |f(x,u) - f(y,u)| / |x - y|.
double estimate_L_sampled(const PlantModel& f, const Region& region,
                          const ControlSet& controls, int samples, std::uint64_t seed);

/// Smallest B with B Q - P >= 0, i.e. lambda_max(Lq^{-1} P Lq^{-T}) for
/// Q = Lq Lq^T. Throws ConsistencyError if the result is below 1 - 1e-9,
/// which cannot happen for a correct Riccati solution (P >= Q).
double estimate_B(const StageCost& cost, const QuadValueFunction& p_inf);

/// Largest c_bar with {x^T P x <= c_bar} inside S.
LevelSet largest_level_set(const SymMatrix& P, const Region& region);

/// Everything needed to run and check the closed loop of one certificate.
struct CertificateBundle {
  Certificate certificate;
  LevelSet level_set;
  QuadValueFunction value;     ///< V_{gamma,N} of the surrogate
  FeedbackGain gain;           ///< first-step gain K_N
  QuadValueFunction value_inf; ///< V_{1,inf}, the source of B
};

/// Full pipeline: L, V_{1,inf} -> B, eigenvalue extremes of Q and R, the
/// certificate constants at (gamma, N, p_bar), V_{gamma,N} and its level set.
CertificateBundle build_certificate(const LinearSystem& surrogate, const StageCost& cost,
                                    double gamma, const Horizon& N, double p_bar,
                                    const Region& region, const EnvelopeConfig& cfg = {});

/// Assembles CertInputs from a surrogate and cost (L and B estimated).
CertInputs cert_inputs_for(const LinearSystem& surrogate, const StageCost& cost,
                           double p_bar);

/// Flat JSON object with keys L, B, p_bar, gamma, horizon, kappa_tilde,
/// alpha, A, stable, level_set_c, justification. Numbers carry 17
/// significant digits; horizon and level_set_c may be the string "inf".
std::string certificate_to_json(const Certificate& c);
Certificate certificate_from_json(const std::string& text);

}  // namespace mpcert

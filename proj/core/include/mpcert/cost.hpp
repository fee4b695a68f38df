#pragma once

#include "mpcert/matprims.hpp"

namespace mpcert {

/// Quadratic stage cost l(x, u) = x^T Q x + u^T R u with Q, R positive definite.
class StageCost {
 public:
  StageCost(SymMatrix q, SymMatrix r);

  const SymMatrix& Q() const { return q_; }
  const SymMatrix& R() const { return r_; }
  Eigen::Index state_dim() const { return q_.dim(); }
  Eigen::Index control_dim() const { return r_.dim(); }

  double operator()(const Vector& x, const Vector& u) const {
    return weighted_norm_sq(x, q_) + weighted_norm_sq(u, r_);
  }

 private:
  SymMatrix q_;
  SymMatrix r_;
};

}  // namespace mpcert

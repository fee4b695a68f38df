#pragma once

#include <iosfwd>

#include "mpcert_cli/config.hpp"

namespace mpcert::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotStable = 2;
inline constexpr int kExitViolation = 3;

/// Certificate JSON. Exit 0 when stable, 2 otherwise.
int cmd_certify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// CSV N,gamma,p_bar,alpha_uniform,alpha_fixedN,A,stable over the sweep grid.
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// CSV s,kappa_N<N>...,kappa_uniform,argmin_n0.
int cmd_kappa(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Aggregate verification report JSON; per-run trajectory CSVs go to
/// simulate.trajectory_dir when set. Exit 3 on a certified violation.
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Shooting versus Riccati comparison and Bellman residuals as JSON.
int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace mpcert::cli

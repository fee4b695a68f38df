#pragma once

#include <mpcert/bounds.hpp>
#include <mpcert/cost.hpp>
#include <mpcert/errors.hpp>
#include <mpcert/ocp.hpp>
#include <mpcert/systems.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mpcert::cli {

/// Malformed or incomplete configuration. The message names the offending key.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct SystemSpec {
  std::optional<std::string> preset;
  // Continuous-time data discretized by zero-order hold.
  std::optional<Matrix> A_c;
  std::optional<Matrix> B_c;
  std::optional<double> T;
  // Discrete-time data used as is.
  std::optional<Matrix> A;
  std::optional<Matrix> B_u;
};

struct RegionSpec {
  std::string kind = "all";  // all | ball | box
  double radius = 0.0;
  Vector half_widths;
};

struct MismatchSpec {
  int grid = 9;
  double u_bound = 1.0;
};

struct SweepSpec {
  std::vector<Horizon> N;
  std::vector<double> gamma;
  std::vector<double> p_bar;

  bool empty() const { return N.empty() && gamma.empty() && p_bar.empty(); }
};

struct KappaSpec {
  std::optional<double> gamma;
  std::optional<double> L;
  std::optional<double> B;
  std::vector<long> N;
  std::vector<double> s;
};

struct SimulateSpec {
  long steps = 200;
  std::vector<Vector> initial_states;
  std::size_t count = 0;
  std::optional<std::string> trajectory_dir;
};

struct OracleSpec {
  int restarts = 3;
  std::vector<Vector> initial_states;
  std::size_t count = 5;
  double radius = 0.5;
  std::size_t bellman_samples = 100;
  int u_grid = 21;
};

struct RunConfig {
  SystemSpec system;
  std::optional<Matrix> Q;
  std::optional<Matrix> R;
  double gamma = 1.0;
  Horizon horizon = Horizon::infinite();
  /// Either a fixed mismatch bound or, when estimate_p_bar is set, sampled
  /// from the plant and surrogate over the region.
  double p_bar = 0.0;
  bool estimate_p_bar = false;
  MismatchSpec mismatch;
  RegionSpec region;
  long envelope_cap = 10000;
  std::optional<double> L;
  std::optional<double> B;
  SweepSpec sweep;
  KappaSpec kappa;
  SimulateSpec simulate;
  OracleSpec oracle;
  std::uint64_t seed = 0;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Defaults of a named preset ("pendulum", "pendulum-linear"): the system,
/// Q = diag(10, 1), R = 0.1, gamma = 1, N = 41, p_bar = 0, S = R^n.
RunConfig preset_config(const std::string& name);

/// Parses JSON text. Keys present in the text override `base`; a "preset"
/// key in the text first resets the base to that preset's defaults.
RunConfig parse_config(const std::string& text, const RunConfig& base = {});

std::string serialize_config(const RunConfig& cfg);

/// Resolved objects of a validated config.
struct Problem {
  LinearSystem surrogate;
  PlantModel plant;
  StageCost cost;
  Region region;
  EnvelopeConfig envelope;
};

/// Builds the surrogate, plant, cost and region. Throws ConfigError naming
/// the missing or inconsistent key.
Problem resolve(const RunConfig& cfg);

}  // namespace mpcert::cli

#include "mpcert_cli/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

namespace mpcert::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key \"" + key + "\": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      fail(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

long as_integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<long>();
}

Vector as_vector(const json& v, const std::string& key) {
  if (!v.is_array()) fail(key, "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = as_number(v[i], key);
  }
  return out;
}

// A number (1x1), an array of rows, or {"diag": [...]}.
Matrix as_matrix(const json& v, const std::string& key) {
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (v.is_object()) {
    check_keys(v, key, {"diag"});
    if (!v.contains("diag")) fail(key, "expected {\"diag\": [...]}");
    return as_vector(v.at("diag"), key + ".diag").asDiagonal();
  }
  if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty()) {
    fail(key, "expected a matrix as an array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector row = as_vector(v[static_cast<std::size_t>(i)], key);
    if (row.size() != cols) fail(key, "rows have different lengths");
    out.row(i) = row.transpose();
  }
  return out;
}

Horizon as_horizon(const json& v, const std::string& key) {
  if (v.is_string()) {
    if (v.get<std::string>() != "inf") fail(key, "expected a positive integer or \"inf\"");
    return Horizon::infinite();
  }
  const long n = as_integer(v, key);
  if (n < 1) fail(key, "horizon must be >= 1");
  return Horizon::finite(n);
}

// A list, or {"from": a, "to": b} for integers, or {"from", "to", "points"}
// for an evenly spaced real grid.
std::vector<double> as_real_grid(const json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(as_number(e, key));
    return out;
  }
  if (!v.is_object()) fail(key, "expected a list or {from, to, points}");
  check_keys(v, key, {"from", "to", "points"});
  if (!v.contains("from") || !v.contains("to") || !v.contains("points")) {
    fail(key, "range needs from, to and points");
  }
  const double lo = as_number(v.at("from"), key + ".from");
  const double hi = as_number(v.at("to"), key + ".to");
  const long points = as_integer(v.at("points"), key + ".points");
  if (points < 1) fail(key + ".points", "must be >= 1");
  if (points == 1) return {lo};
  for (long i = 0; i < points; ++i) {
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return out;
}

std::vector<long> as_integer_grid(const json& v, const std::string& key) {
  std::vector<long> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(as_integer(e, key));
    return out;
  }
  if (!v.is_object()) fail(key, "expected a list or {from, to}");
  check_keys(v, key, {"from", "to"});
  if (!v.contains("from") || !v.contains("to")) fail(key, "range needs from and to");
  const long lo = as_integer(v.at("from"), key + ".from");
  const long hi = as_integer(v.at("to"), key + ".to");
  for (long n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

std::vector<Horizon> as_horizon_grid(const json& v, const std::string& key) {
  if (v.is_object()) {
    std::vector<Horizon> out;
    for (long n : as_integer_grid(v, key)) {
      if (n < 1) fail(key, "horizon must be >= 1");
      out.push_back(Horizon::finite(n));
    }
    return out;
  }
  if (!v.is_array()) fail(key, "expected a list or {from, to}");
  std::vector<Horizon> out;
  for (const auto& e : v) out.push_back(as_horizon(e, key));
  return out;
}

std::vector<Vector> as_states(const json& v, const std::string& key) {
  if (!v.is_array()) fail(key, "expected a list of state vectors");
  std::vector<Vector> out;
  for (const auto& e : v) out.push_back(as_vector(e, key));
  return out;
}

double gamma_value(const json& v, const std::string& key) {
  const double g = as_number(v, key);
  if (!(g > 0.0 && g <= 1.0)) fail(key, "must lie in (0, 1]");
  return g;
}

SystemSpec parse_system(const json& v) {
  SystemSpec s;
  if (v.is_string()) {
    s.preset = v.get<std::string>();
    return s;
  }
  if (!v.is_object()) fail("system", "expected a preset name or an object");
  check_keys(v, "system", {"preset", "A_c", "B_c", "T", "A", "B_u"});
  if (v.contains("preset")) {
    if (!v.at("preset").is_string()) fail("system.preset", "expected a string");
    s.preset = v.at("preset").get<std::string>();
  }
  if (v.contains("A_c")) s.A_c = as_matrix(v.at("A_c"), "system.A_c");
  if (v.contains("B_c")) s.B_c = as_matrix(v.at("B_c"), "system.B_c");
  if (v.contains("T")) s.T = as_number(v.at("T"), "system.T");
  if (v.contains("A")) s.A = as_matrix(v.at("A"), "system.A");
  if (v.contains("B_u")) s.B_u = as_matrix(v.at("B_u"), "system.B_u");
  return s;
}

RegionSpec parse_region(const json& v) {
  RegionSpec r;
  if (v.is_string()) {
    if (v.get<std::string>() != "all") fail("region", "string form must be \"all\"");
    return r;
  }
  if (!v.is_object()) fail("region", "expected \"all\" or an object");
  check_keys(v, "region", {"kind", "radius", "half_widths"});
  if (!v.contains("kind") || !v.at("kind").is_string()) fail("region.kind", "missing");
  r.kind = v.at("kind").get<std::string>();
  if (r.kind == "ball") {
    if (!v.contains("radius")) fail("region.radius", "missing");
    r.radius = as_number(v.at("radius"), "region.radius");
    if (!(r.radius > 0.0)) fail("region.radius", "must be positive");
  } else if (r.kind == "box") {
    if (!v.contains("half_widths")) fail("region.half_widths", "missing");
    r.half_widths = as_vector(v.at("half_widths"), "region.half_widths");
    if (!(r.half_widths.array() > 0.0).all()) fail("region.half_widths", "must be positive");
  } else if (r.kind != "all") {
    fail("region.kind", "expected all, ball or box");
  }
  return r;
}

bool same_matrix(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
}

bool same_vector(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }

bool same_states(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_vector(a[i], b[i])) return false;
  }
  return true;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json horizon_json(const Horizon& h) {
  return h.is_infinite() ? json("inf") : json(h.value());
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
  const auto& sa = a.system;
  const auto& sb = b.system;
  return sa.preset == sb.preset && same_matrix(sa.A_c, sb.A_c) && same_matrix(sa.B_c, sb.B_c) &&
         sa.T == sb.T && same_matrix(sa.A, sb.A) && same_matrix(sa.B_u, sb.B_u) &&
         same_matrix(a.Q, b.Q) && same_matrix(a.R, b.R) && a.gamma == b.gamma &&
         a.horizon == b.horizon && a.p_bar == b.p_bar && a.estimate_p_bar == b.estimate_p_bar &&
         a.mismatch.grid == b.mismatch.grid && a.mismatch.u_bound == b.mismatch.u_bound &&
         a.region.kind == b.region.kind && a.region.radius == b.region.radius &&
         same_vector(a.region.half_widths, b.region.half_widths) &&
         a.envelope_cap == b.envelope_cap && a.L == b.L && a.B == b.B &&
         a.sweep.N == b.sweep.N && a.sweep.gamma == b.sweep.gamma &&
         a.sweep.p_bar == b.sweep.p_bar && a.kappa.gamma == b.kappa.gamma &&
         a.kappa.L == b.kappa.L && a.kappa.B == b.kappa.B && a.kappa.N == b.kappa.N &&
         a.kappa.s == b.kappa.s && a.simulate.steps == b.simulate.steps &&
         same_states(a.simulate.initial_states, b.simulate.initial_states) &&
         a.simulate.count == b.simulate.count &&
         a.simulate.trajectory_dir == b.simulate.trajectory_dir &&
         a.oracle.restarts == b.oracle.restarts &&
         same_states(a.oracle.initial_states, b.oracle.initial_states) &&
         a.oracle.count == b.oracle.count && a.oracle.radius == b.oracle.radius &&
         a.oracle.bellman_samples == b.oracle.bellman_samples &&
         a.oracle.u_grid == b.oracle.u_grid && a.seed == b.seed;
}

RunConfig preset_config(const std::string& name) {
  if (name != "pendulum" && name != "pendulum-linear") fail("preset", "unknown preset " + name);
  RunConfig c;
  c.system.preset = name;
  Matrix q = Matrix::Zero(2, 2);
  q(0, 0) = 10.0;
  q(1, 1) = 1.0;
  c.Q = q;
  c.R = Matrix::Constant(1, 1, 0.1);
  c.gamma = 1.0;
  c.horizon = Horizon::finite(41);
  return c;
}

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j, "", {"preset", "system", "Q", "R", "gamma", "horizon", "p_bar", "mismatch",
                     "region", "envelope_cap", "L", "B", "sweep", "kappa", "simulate", "oracle",
                     "seed"});

  RunConfig c = base;
  if (j.contains("preset")) {
    if (!j.at("preset").is_string()) fail("preset", "expected a string");
    c = preset_config(j.at("preset").get<std::string>());
  }
  if (j.contains("system")) c.system = parse_system(j.at("system"));
  if (j.contains("Q")) c.Q = as_matrix(j.at("Q"), "Q");
  if (j.contains("R")) c.R = as_matrix(j.at("R"), "R");
  if (j.contains("gamma")) c.gamma = gamma_value(j.at("gamma"), "gamma");
  if (j.contains("horizon")) c.horizon = as_horizon(j.at("horizon"), "horizon");
  if (j.contains("p_bar")) {
    const auto& v = j.at("p_bar");
    if (v.is_string()) {
      if (v.get<std::string>() != "estimate") fail("p_bar", "expected a number or \"estimate\"");
      c.estimate_p_bar = true;
      c.p_bar = 0.0;
    } else {
      c.p_bar = as_number(v, "p_bar");
      c.estimate_p_bar = false;
      if (!(c.p_bar >= 0.0)) fail("p_bar", "must be >= 0");
    }
  }
  if (j.contains("mismatch")) {
    const auto& m = j.at("mismatch");
    if (!m.is_object()) fail("mismatch", "expected an object");
    check_keys(m, "mismatch", {"grid", "u_bound"});
    if (m.contains("grid")) c.mismatch.grid = static_cast<int>(as_integer(m.at("grid"), "mismatch.grid"));
    if (m.contains("u_bound")) c.mismatch.u_bound = as_number(m.at("u_bound"), "mismatch.u_bound");
    if (c.mismatch.grid < 2) fail("mismatch.grid", "must be >= 2");
    if (!(c.mismatch.u_bound > 0.0)) fail("mismatch.u_bound", "must be positive");
  }
  if (j.contains("region")) c.region = parse_region(j.at("region"));
  if (j.contains("envelope_cap")) {
    c.envelope_cap = as_integer(j.at("envelope_cap"), "envelope_cap");
    if (c.envelope_cap < 1) fail("envelope_cap", "must be >= 1");
  }
  if (j.contains("L")) {
    c.L = as_number(j.at("L"), "L");
    if (!(*c.L >= 0.0)) fail("L", "must be >= 0");
  }
  if (j.contains("B")) {
    c.B = as_number(j.at("B"), "B");
    if (!(*c.B >= 1.0)) fail("B", "must be >= 1");
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (!s.is_object()) fail("sweep", "expected an object");
    check_keys(s, "sweep", {"N", "gamma", "p_bar"});
    c.sweep = SweepSpec{};
    if (s.contains("N")) c.sweep.N = as_horizon_grid(s.at("N"), "sweep.N");
    if (s.contains("gamma")) {
      for (double g : as_real_grid(s.at("gamma"), "sweep.gamma")) {
        c.sweep.gamma.push_back(gamma_value(g, "sweep.gamma"));
      }
    }
    if (s.contains("p_bar")) c.sweep.p_bar = as_real_grid(s.at("p_bar"), "sweep.p_bar");
  }
  if (j.contains("kappa")) {
    const auto& k = j.at("kappa");
    if (!k.is_object()) fail("kappa", "expected an object");
    check_keys(k, "kappa", {"gamma", "L", "B", "N", "s"});
    c.kappa = KappaSpec{};
    if (k.contains("gamma")) c.kappa.gamma = gamma_value(k.at("gamma"), "kappa.gamma");
    if (k.contains("L")) c.kappa.L = as_number(k.at("L"), "kappa.L");
    if (k.contains("B")) c.kappa.B = as_number(k.at("B"), "kappa.B");
    if (k.contains("N")) c.kappa.N = as_integer_grid(k.at("N"), "kappa.N");
    if (k.contains("s")) c.kappa.s = as_real_grid(k.at("s"), "kappa.s");
    for (long n : c.kappa.N) {
      if (n < 1) fail("kappa.N", "entries must be >= 1");
    }
    for (double s : c.kappa.s) {
      if (!(s >= 0.0)) fail("kappa.s", "entries must be >= 0");
    }
  }
  if (j.contains("simulate")) {
    const auto& s = j.at("simulate");
    if (!s.is_object()) fail("simulate", "expected an object");
    check_keys(s, "simulate", {"steps", "initial_states", "count", "trajectory_dir"});
    c.simulate = SimulateSpec{};
    if (s.contains("steps")) c.simulate.steps = as_integer(s.at("steps"), "simulate.steps");
    if (c.simulate.steps < 1) fail("simulate.steps", "must be >= 1");
    if (s.contains("initial_states")) {
      c.simulate.initial_states = as_states(s.at("initial_states"), "simulate.initial_states");
    }
    if (s.contains("count")) {
      const long n = as_integer(s.at("count"), "simulate.count");
      if (n < 0) fail("simulate.count", "must be >= 0");
      c.simulate.count = static_cast<std::size_t>(n);
    }
    if (s.contains("trajectory_dir")) {
      if (!s.at("trajectory_dir").is_string()) fail("simulate.trajectory_dir", "expected a string");
      c.simulate.trajectory_dir = s.at("trajectory_dir").get<std::string>();
    }
  }
  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    if (!o.is_object()) fail("oracle", "expected an object");
    check_keys(o, "oracle",
               {"restarts", "initial_states", "count", "radius", "bellman_samples", "u_grid"});
    c.oracle = OracleSpec{};
    if (o.contains("restarts")) {
      c.oracle.restarts = static_cast<int>(as_integer(o.at("restarts"), "oracle.restarts"));
      if (c.oracle.restarts < 1) fail("oracle.restarts", "must be >= 1");
    }
    if (o.contains("initial_states")) {
      c.oracle.initial_states = as_states(o.at("initial_states"), "oracle.initial_states");
    }
    if (o.contains("count")) {
      const long n = as_integer(o.at("count"), "oracle.count");
      if (n < 0) fail("oracle.count", "must be >= 0");
      c.oracle.count = static_cast<std::size_t>(n);
    }
    if (o.contains("radius")) c.oracle.radius = as_number(o.at("radius"), "oracle.radius");
    if (o.contains("bellman_samples")) {
      const long n = as_integer(o.at("bellman_samples"), "oracle.bellman_samples");
      if (n < 0) fail("oracle.bellman_samples", "must be >= 0");
      c.oracle.bellman_samples = static_cast<std::size_t>(n);
    }
    if (o.contains("u_grid")) {
      c.oracle.u_grid = static_cast<int>(as_integer(o.at("u_grid"), "oracle.u_grid"));
      if (c.oracle.u_grid < 2) fail("oracle.u_grid", "must be >= 2");
    }
  }
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      fail("seed", "expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  return c;
}

std::string serialize_config(const RunConfig& c) {
  json j;
  json sys = json::object();
  if (c.system.preset) sys["preset"] = *c.system.preset;
  if (c.system.A_c) sys["A_c"] = matrix_json(*c.system.A_c);
  if (c.system.B_c) sys["B_c"] = matrix_json(*c.system.B_c);
  if (c.system.T) sys["T"] = *c.system.T;
  if (c.system.A) sys["A"] = matrix_json(*c.system.A);
  if (c.system.B_u) sys["B_u"] = matrix_json(*c.system.B_u);
  j["system"] = sys;
  if (c.Q) j["Q"] = matrix_json(*c.Q);
  if (c.R) j["R"] = matrix_json(*c.R);
  j["gamma"] = c.gamma;
  j["horizon"] = horizon_json(c.horizon);
  j["p_bar"] = c.estimate_p_bar ? json("estimate") : json(c.p_bar);
  j["mismatch"] = {{"grid", c.mismatch.grid}, {"u_bound", c.mismatch.u_bound}};
  if (c.region.kind == "ball") {
    j["region"] = {{"kind", "ball"}, {"radius", c.region.radius}};
  } else if (c.region.kind == "box") {
    j["region"] = {{"kind", "box"}, {"half_widths", vector_json(c.region.half_widths)}};
  } else {
    j["region"] = "all";
  }
  j["envelope_cap"] = c.envelope_cap;
  if (c.L) j["L"] = *c.L;
  if (c.B) j["B"] = *c.B;

  json sweep = json::object();
  if (!c.sweep.N.empty()) {
    json n = json::array();
    for (const auto& h : c.sweep.N) n.push_back(horizon_json(h));
    sweep["N"] = n;
  }
  if (!c.sweep.gamma.empty()) sweep["gamma"] = c.sweep.gamma;
  if (!c.sweep.p_bar.empty()) sweep["p_bar"] = c.sweep.p_bar;
  j["sweep"] = sweep;

  json kappa = json::object();
  if (c.kappa.gamma) kappa["gamma"] = *c.kappa.gamma;
  if (c.kappa.L) kappa["L"] = *c.kappa.L;
  if (c.kappa.B) kappa["B"] = *c.kappa.B;
  if (!c.kappa.N.empty()) kappa["N"] = c.kappa.N;
  if (!c.kappa.s.empty()) kappa["s"] = c.kappa.s;
  j["kappa"] = kappa;

  json sim = {{"steps", c.simulate.steps}, {"count", c.simulate.count}};
  if (!c.simulate.initial_states.empty()) {
    json xs = json::array();
    for (const auto& x : c.simulate.initial_states) xs.push_back(vector_json(x));
    sim["initial_states"] = xs;
  }
  if (c.simulate.trajectory_dir) sim["trajectory_dir"] = *c.simulate.trajectory_dir;
  j["simulate"] = sim;

  json oracle = {{"restarts", c.oracle.restarts},
                 {"count", c.oracle.count},
                 {"radius", c.oracle.radius},
                 {"bellman_samples", c.oracle.bellman_samples},
                 {"u_grid", c.oracle.u_grid}};
  if (!c.oracle.initial_states.empty()) {
    json xs = json::array();
    for (const auto& x : c.oracle.initial_states) xs.push_back(vector_json(x));
    oracle["initial_states"] = xs;
  }
  j["oracle"] = oracle;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

Problem resolve(const RunConfig& cfg) {
  const auto& s = cfg.system;
  std::optional<LinearSystem> surrogate;
  std::optional<PlantModel> plant;
  if (s.preset) {
    try {
      SystemPreset p = make_preset(*s.preset);
      surrogate = p.surrogate;
      plant = p.plant;
    } catch (const ValidationError& e) {
      fail("system.preset", e.what());
    }
  } else if (s.A_c || s.B_c || s.T) {
    if (!s.A_c) fail("system.A_c", "missing");
    if (!s.B_c) fail("system.B_c", "missing");
    if (!s.T) fail("system.T", "missing");
    try {
      surrogate = zoh_discretize_linear(*s.A_c, *s.B_c, *s.T);
    } catch (const ValidationError& e) {
      fail("system", e.what());
    }
  } else if (s.A || s.B_u) {
    if (!s.A) fail("system.A", "missing");
    if (!s.B_u) fail("system.B_u", "missing");
    try {
      surrogate = LinearSystem(*s.A, *s.B_u);
    } catch (const ValidationError& e) {
      fail("system", e.what());
    }
  } else {
    fail("system", "missing (give a preset, {A_c, B_c, T} or {A, B_u})");
  }
  if (!plant) plant = linear_plant(*surrogate, "surrogate");

  if (!cfg.Q) fail("Q", "missing");
  if (!cfg.R) fail("R", "missing");
  const Eigen::Index n = surrogate->state_dim();
  const Eigen::Index m = surrogate->control_dim();
  if (cfg.Q->rows() != n || cfg.Q->cols() != n) {
    fail("Q", "must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (cfg.R->rows() != m || cfg.R->cols() != m) {
    fail("R", "must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  std::optional<StageCost> cost;
  try {
    cost = StageCost(SymMatrix(*cfg.Q), SymMatrix(*cfg.R));
  } catch (const std::exception& e) {
    fail(std::string("Q/R"), e.what());
  }

  Region region = Region::all();
  if (cfg.region.kind == "ball") {
    region = Region::ball(cfg.region.radius);
  } else if (cfg.region.kind == "box") {
    if (cfg.region.half_widths.size() != n) fail("region.half_widths", "dimension mismatch");
    region = Region::box(cfg.region.half_widths);
  }
  return Problem{*surrogate, *plant, *cost, region, EnvelopeConfig{cfg.envelope_cap}};
}

}  // namespace mpcert::cli

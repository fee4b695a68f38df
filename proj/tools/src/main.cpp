#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mpcert_cli/commands.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mpcert::cli::ConfigError("cannot read config file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mpcert::cli;

  CLI::App app{"Stability and suboptimality certificates for MPC under plant-model mismatch"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path = "-";
  std::optional<std::uint64_t> seed;
  std::string preset;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_path, "Output file, - for standard output");
  app.add_option("--seed", seed, "Seed for all sampling");
  app.add_option("--preset", preset, "Named system preset with default weights")
      ->check(CLI::IsMember({"pendulum", "pendulum-linear"}));

  using Command = int (*)(const RunConfig&, std::ostream&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"certify", "Print the certificate; exit 2 when not stable", cmd_certify},
      {"sweep", "Suboptimality indices over N, gamma and p_bar grids", cmd_sweep},
      {"kappa", "Tabulate kappa_{gamma,N} and the uniform envelope", cmd_kappa},
      {"simulate", "Closed-loop rollouts with verification; exit 3 on a violation", cmd_simulate},
      {"oracle", "Shooting versus Riccati and Bellman residuals", cmd_oracle},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (config_path.empty() && preset.empty()) {
      throw ConfigError("give --config <path> or --preset <name>");
    }
    RunConfig cfg = preset.empty() ? RunConfig{} : preset_config(preset);
    if (!config_path.empty()) cfg = parse_config(read_file(config_path), cfg);
    if (seed) cfg.seed = *seed;

    Command fn = nullptr;
    for (const auto& [name, help, f] : commands) {
      if (app.got_subcommand(name)) fn = f;
    }

    if (out_path == "-") return fn(cfg, std::cout, std::cerr);
    std::ostringstream buffer;
    const int code = fn(cfg, buffer, std::cerr);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << buffer.str();
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

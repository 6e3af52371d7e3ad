#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <tumor_sde/errors.hpp>

#include "tumor_cli/commands.hpp"
#include "tumor_cli/config.hpp"

int main(int argc, char** argv) {
  using namespace tumor_cli;

  CLI::App app{"Stochastic stability toolkit for 2-D tumor-immune models"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string model;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--config", config_path, "INI config file")->expected(1);
  app.add_option("--out", out_dir, "output directory (overrides [run] out)")->expected(1);
  app.add_option("--model", model, "model name (overrides [run] model)")->expected(1);
  auto* seed_opt =
      app.add_option("--seed", seed, "RNG seed (overrides [run] seed)")->expected(1);

  struct SubEntry {
    Command cmd;
    CLI::App* sub;
  };
  SubEntry subs[] = {
      {Command::Equilibria,
       app.add_subcommand("equilibria", "closed-form equilibria with residuals and eigenvalues")},
      {Command::Simulate, app.add_subcommand("simulate", "sample paths with CSV and SVG output")},
      {Command::Lyapunov, app.add_subcommand("lyapunov", "top Lyapunov exponent per method")},
      {Command::Sweep, app.add_subcommand("sweep", "lambda(alpha) sweep with sign changes")},
      {Command::Stability, app.add_subcommand("stability", "certificate and exponent verdict")},
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  seed_given = seed_opt->count() > 0;

  Command cmd = Command::Equilibria;
  for (const SubEntry& entry : subs)
    if (entry.sub->parsed()) cmd = entry.cmd;

  try {
    IniDoc ini;
    if (!config_path.empty()) ini = load_ini(config_path);

    CliOverrides cli;
    if (!model.empty()) cli.model = model;
    if (!out_dir.empty()) cli.out_dir = out_dir;
    if (seed_given) cli.seed = seed;

    const RunConfig cfg = resolve(cmd, ini, cli);
    return run_command(cfg, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tumor_sde::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const tumor_sde::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

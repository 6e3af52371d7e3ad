#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <tumor_sde/linalg.hpp>
#include <tumor_sde/lyapunov.hpp>
#include <tumor_sde/simulate.hpp>

namespace tumor_cli {

// Configuration and usage problems; the driver maps these to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Command { Equilibria, Simulate, Lyapunov, Sweep, Stability };

const char* to_string(Command cmd);

// Line-oriented key = value pairs under [section] headers; '#' and ';' start
// comments.  Keys outside any section live under the empty section name.
struct IniDoc {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
};

IniDoc parse_ini(std::istream& in, const std::string& origin);
IniDoc load_ini(const std::string& path);

enum class NoiseKind { Full, Spiral, Diagonal };

struct NoiseBlock {
  NoiseKind kind = NoiseKind::Full;
  tumor_sde::Mat2 slopes;  // Full
  double alpha = 0.0;      // Spiral
  double beta = -2.0;
  double sigma1 = 0.0;  // Diagonal
  double sigma2 = 0.0;
  bool from_default = false;

  tumor_sde::Mat2 matrix() const;
};

struct SimBlock {
  double h = 0.01;
  std::size_t steps = 5000;
  std::uint64_t seed = 0;
  tumor_sde::Scheme scheme = tumor_sde::Scheme::Euler2;
  std::optional<tumor_sde::Vec2> initial;
  bool linearized = false;
};

struct SweepBlock {
  double alpha_min = -4.0;
  double alpha_max = 4.0;
  double alpha_step = 0.05;
  tumor_sde::LyapunovMethod method = tumor_sde::LyapunovMethod::GridScheme;
  std::size_t grid_n = 2000;
  std::size_t mc_paths = 2000;
  double mc_h = 1e-3;
  std::size_t mc_steps = 20000;
};

struct LyapunovBlock {
  std::vector<tumor_sde::LyapunovMethod> methods;  // resolved request order
  bool density = false;
  std::size_t grid_n = 2000;
  std::size_t mc_paths = 2000;
  double mc_h = 1e-3;
  std::size_t mc_steps = 20000;
};

struct RunConfig {
  Command command = Command::Equilibria;
  std::string model;
  std::map<std::string, double> overrides;  // raw [params] entries
  std::string equilibrium = "P1";           // P1 | P2 | numeric index
  std::string out_dir = ".";
  NoiseBlock noise;
  SimBlock sim;
  SweepBlock sweep;
  LyapunovBlock lyapunov;
};

// Values given on the command line; they win over the config file.
struct CliOverrides {
  std::optional<std::string> model;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve(Command cmd, const IniDoc& ini, const CliOverrides& cli);

// Fully resolved key = value echo; feeding it back through --config
// reproduces the run byte for byte.
std::string render_ini(const RunConfig& cfg);

}  // namespace tumor_cli

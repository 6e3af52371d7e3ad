#include "tumor_cli/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <tumor_sde/errors.hpp>
#include <tumor_sde/models.hpp>

namespace tumor_cli {

using tumor_sde::LyapunovMethod;
using tumor_sde::Mat2;
using tumor_sde::Vec2;

const char* to_string(Command cmd) {
  switch (cmd) {
    case Command::Equilibria: return "equilibria";
    case Command::Simulate: return "simulate";
    case Command::Lyapunov: return "lyapunov";
    case Command::Sweep: return "sweep";
    case Command::Stability: return "stability";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& where, const std::string& text) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw ConfigError(where + ": '" + text + "' is not a number");
  return v;
}

std::uint64_t parse_u64(const std::string& where, const std::string& text) {
  char* end = nullptr;
  unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || text.find('-') != std::string::npos)
    throw ConfigError(where + ": '" + text + "' is not a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& where, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(where + ": '" + text + "' is not a boolean (true/false)");
}

LyapunovMethod parse_method(const std::string& where, const std::string& name) {
  if (name == "closed" || name == "closed-form") return LyapunovMethod::ClosedForm;
  if (name == "grid") return LyapunovMethod::GridScheme;
  if (name == "mc") return LyapunovMethod::MonteCarlo;
  throw ConfigError(where + ": unknown method '" + name + "' (closed | grid | mc)");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::map<std::string, std::string>* section_of(const IniDoc& ini, const std::string& name) {
  auto it = ini.sections.find(name);
  return it == ini.sections.end() ? nullptr : &it->second;
}

void reject_unknown_keys(const IniDoc& ini, const std::string& section,
                         std::initializer_list<const char*> known) {
  const auto* sec = section_of(ini, section);
  if (!sec) return;
  for (const auto& [key, value] : *sec) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("[" + section + "] has an unknown key '" + key + "'");
  }
}

}  // namespace

bool IniDoc::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) != 0;
}

std::string IniDoc::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  auto it = sections.find(section);
  if (it == sections.end()) return fallback;
  auto kt = it->second.find(key);
  return kt == it->second.end() ? fallback : kt->second;
}

IniDoc parse_ini(std::istream& in, const std::string& origin) {
  IniDoc doc;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3)
        throw ConfigError(where + ": malformed section header '" + t + "'");
      section = trim(t.substr(1, t.size() - 2));
      doc.sections[section];
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value, got '" + t + "'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (doc.sections[section].count(key))
      throw ConfigError(where + ": duplicate key '" + key + "' in [" + section + "]");
    doc.sections[section][key] = value;
  }
  return doc;
}

IniDoc load_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_ini(in, path);
}

Mat2 NoiseBlock::matrix() const {
  switch (kind) {
    case NoiseKind::Full: return slopes;
    case NoiseKind::Spiral: return Mat2{alpha, -beta, beta, alpha};
    case NoiseKind::Diagonal: return Mat2{sigma1, 0.0, 0.0, sigma2};
  }
  return slopes;
}

namespace {

NoiseBlock resolve_noise(Command cmd, const IniDoc& ini, const std::string& model) {
  reject_unknown_keys(ini, "noise",
                      {"b11", "b12", "b21", "b22", "alpha", "beta", "sigma1", "sigma2"});
  const bool any_full = ini.has("noise", "b11") || ini.has("noise", "b12") ||
                        ini.has("noise", "b21") || ini.has("noise", "b22");
  const bool any_spiral = ini.has("noise", "alpha") || ini.has("noise", "beta");
  const bool any_diag = ini.has("noise", "sigma1") || ini.has("noise", "sigma2");
  const int forms = int(any_full) + int(any_spiral) + int(any_diag);
  if (forms > 1)
    throw ConfigError("[noise] mixes forms; give exactly one of the full slopes "
                      "(b11..b22), the spiral pair (alpha, beta), or the diagonal "
                      "pair (sigma1, sigma2)");

  NoiseBlock noise;
  if (forms == 0) {
    // Documented per-model defaults so the common runs need no noise block.
    noise.from_default = true;
    if (model == "kuznetsov-taylor") {
      noise.kind = NoiseKind::Full;
      noise.slopes = Mat2{10.0, -2.0, 2.0, 10.0};
    } else if (model == "bell") {
      noise.kind = NoiseKind::Spiral;
      noise.alpha = 3.0;
      noise.beta = -2.0;
    } else {
      throw ConfigError("model '" + model + "' has no default noise; add a [noise] block");
    }
    return noise;
  }
  if (any_full) {
    for (const char* k : {"b11", "b12", "b21", "b22"})
      if (!ini.has("noise", k))
        throw ConfigError(std::string("[noise] full form needs all of b11..b22; '") + k +
                          "' is missing");
    noise.kind = NoiseKind::Full;
    noise.slopes = Mat2{parse_double("noise.b11", ini.get("noise", "b11", "")),
                        parse_double("noise.b12", ini.get("noise", "b12", "")),
                        parse_double("noise.b21", ini.get("noise", "b21", "")),
                        parse_double("noise.b22", ini.get("noise", "b22", ""))};
  } else if (any_spiral) {
    noise.kind = NoiseKind::Spiral;
    if (ini.has("noise", "alpha"))
      noise.alpha = parse_double("noise.alpha", ini.get("noise", "alpha", ""));
    else if (cmd != Command::Sweep)
      throw ConfigError("[noise] spiral form needs alpha (beta alone is only "
                        "meaningful for sweep, where alpha is the swept variable)");
    noise.beta = parse_double("noise.beta", ini.get("noise", "beta", "-2"));
  } else {
    for (const char* k : {"sigma1", "sigma2"})
      if (!ini.has("noise", k))
        throw ConfigError(std::string("[noise] diagonal form needs sigma1 and sigma2; '") + k +
                          "' is missing");
    noise.kind = NoiseKind::Diagonal;
    noise.sigma1 = parse_double("noise.sigma1", ini.get("noise", "sigma1", ""));
    noise.sigma2 = parse_double("noise.sigma2", ini.get("noise", "sigma2", ""));
    if (noise.sigma1 < 0.0 || noise.sigma2 < 0.0)
      throw ConfigError("[noise] sigma1 and sigma2 must be nonnegative");
  }
  return noise;
}

SimBlock resolve_sim(const IniDoc& ini) {
  reject_unknown_keys(ini, "sim", {"h", "steps", "scheme", "x0", "y0", "dynamics"});
  SimBlock sim;
  if (ini.has("sim", "h")) sim.h = parse_double("sim.h", ini.get("sim", "h", ""));
  if (!(sim.h > 0.0)) throw ConfigError("sim.h must be positive");
  if (ini.has("sim", "steps"))
    sim.steps = static_cast<std::size_t>(parse_u64("sim.steps", ini.get("sim", "steps", "")));
  if (sim.steps == 0) throw ConfigError("sim.steps must be at least 1");
  if (ini.has("sim", "scheme"))
    sim.scheme = tumor_sde::scheme_from_string(ini.get("sim", "scheme", ""));
  const bool has_x0 = ini.has("sim", "x0"), has_y0 = ini.has("sim", "y0");
  if (has_x0 != has_y0) throw ConfigError("sim.x0 and sim.y0 must be given together");
  if (has_x0)
    sim.initial = Vec2{parse_double("sim.x0", ini.get("sim", "x0", "")),
                       parse_double("sim.y0", ini.get("sim", "y0", ""))};
  const std::string dyn = ini.get("sim", "dynamics", "nonlinear");
  if (dyn == "linearized")
    sim.linearized = true;
  else if (dyn != "nonlinear")
    throw ConfigError("sim.dynamics must be 'nonlinear' or 'linearized'");
  return sim;
}

SweepBlock resolve_sweep(const IniDoc& ini) {
  reject_unknown_keys(ini, "sweep", {"alpha_min", "alpha_max", "alpha_step", "method", "grid_n",
                                     "mc_paths", "mc_h", "mc_steps"});
  SweepBlock sweep;
  if (ini.has("sweep", "alpha_min"))
    sweep.alpha_min = parse_double("sweep.alpha_min", ini.get("sweep", "alpha_min", ""));
  if (ini.has("sweep", "alpha_max"))
    sweep.alpha_max = parse_double("sweep.alpha_max", ini.get("sweep", "alpha_max", ""));
  if (ini.has("sweep", "alpha_step"))
    sweep.alpha_step = parse_double("sweep.alpha_step", ini.get("sweep", "alpha_step", ""));
  if (!(sweep.alpha_step > 0.0)) throw ConfigError("sweep.alpha_step must be positive");
  if (!(sweep.alpha_min <= sweep.alpha_max))
    throw ConfigError("sweep.alpha_min must not exceed sweep.alpha_max");
  if (ini.has("sweep", "method"))
    sweep.method = parse_method("sweep.method", ini.get("sweep", "method", ""));
  if (ini.has("sweep", "grid_n"))
    sweep.grid_n =
        static_cast<std::size_t>(parse_u64("sweep.grid_n", ini.get("sweep", "grid_n", "")));
  if (ini.has("sweep", "mc_paths"))
    sweep.mc_paths =
        static_cast<std::size_t>(parse_u64("sweep.mc_paths", ini.get("sweep", "mc_paths", "")));
  if (ini.has("sweep", "mc_h"))
    sweep.mc_h = parse_double("sweep.mc_h", ini.get("sweep", "mc_h", ""));
  if (ini.has("sweep", "mc_steps"))
    sweep.mc_steps =
        static_cast<std::size_t>(parse_u64("sweep.mc_steps", ini.get("sweep", "mc_steps", "")));
  return sweep;
}

LyapunovBlock resolve_lyapunov(const IniDoc& ini) {
  reject_unknown_keys(ini, "lyapunov",
                      {"method", "density", "grid_n", "mc_paths", "mc_h", "mc_steps"});
  LyapunovBlock lyap;
  const std::string request = ini.get("lyapunov", "method", "all");
  if (request == "all") {
    lyap.methods = {LyapunovMethod::ClosedForm, LyapunovMethod::GridScheme,
                    LyapunovMethod::MonteCarlo};
  } else {
    std::stringstream ss(request);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) lyap.methods.push_back(parse_method("lyapunov.method", item));
    }
    if (lyap.methods.empty()) throw ConfigError("lyapunov.method resolves to no methods");
  }
  if (ini.has("lyapunov", "density"))
    lyap.density = parse_bool("lyapunov.density", ini.get("lyapunov", "density", ""));
  if (ini.has("lyapunov", "grid_n"))
    lyap.grid_n =
        static_cast<std::size_t>(parse_u64("lyapunov.grid_n", ini.get("lyapunov", "grid_n", "")));
  if (ini.has("lyapunov", "mc_paths"))
    lyap.mc_paths = static_cast<std::size_t>(
        parse_u64("lyapunov.mc_paths", ini.get("lyapunov", "mc_paths", "")));
  if (ini.has("lyapunov", "mc_h"))
    lyap.mc_h = parse_double("lyapunov.mc_h", ini.get("lyapunov", "mc_h", ""));
  if (ini.has("lyapunov", "mc_steps"))
    lyap.mc_steps = static_cast<std::size_t>(
        parse_u64("lyapunov.mc_steps", ini.get("lyapunov", "mc_steps", "")));
  return lyap;
}

}  // namespace

RunConfig resolve(Command cmd, const IniDoc& ini, const CliOverrides& cli) {
  for (const auto& [name, keys] : ini.sections) {
    if (name != "run" && name != "params" && name != "noise" && name != "sim" &&
        name != "sweep" && name != "lyapunov")
      throw ConfigError("unknown config section [" + name + "]");
  }
  reject_unknown_keys(ini, "run", {"command", "model", "equilibrium", "out", "seed"});

  RunConfig cfg;
  cfg.command = cmd;

  if (cli.model)
    cfg.model = *cli.model;
  else
    cfg.model = ini.get("run", "model", "");
  if (cfg.model.empty())
    throw ConfigError("no model given; use --model or [run] model");

  cfg.equilibrium = ini.get("run", "equilibrium", "P1");
  if (cfg.equilibrium != "P1" && cfg.equilibrium != "P2") {
    parse_u64("run.equilibrium", cfg.equilibrium);  // must be an index then
  }

  if (cli.out_dir)
    cfg.out_dir = *cli.out_dir;
  else
    cfg.out_dir = ini.get("run", "out", ".");

  if (cli.seed)
    cfg.sim.seed = *cli.seed;
  else if (ini.has("run", "seed"))
    cfg.sim.seed = parse_u64("run.seed", ini.get("run", "seed", ""));

  if (const auto* params = section_of(ini, "params")) {
    for (const auto& [key, value] : *params)
      cfg.overrides[key] = parse_double("params." + key, value);
  }
  // Materialize the full parameter set (and surface bad names/values now), so
  // the echoed config pins every value the run used.
  cfg.overrides = tumor_sde::make_model(cfg.model, cfg.overrides).params.values;

  const std::uint64_t seed = cfg.sim.seed;
  if (cmd == Command::Simulate) cfg.sim = resolve_sim(ini);
  cfg.sim.seed = seed;

  if (cmd != Command::Equilibria) cfg.noise = resolve_noise(cmd, ini, cfg.model);
  if (cmd == Command::Sweep) {
    if (cfg.noise.kind == NoiseKind::Diagonal)
      throw ConfigError("sweep needs the spiral pair or the full slope matrix, "
                        "not diagonal sigmas");
    cfg.sweep = resolve_sweep(ini);
  }
  if (cmd == Command::Lyapunov || cmd == Command::Stability) cfg.lyapunov = resolve_lyapunov(ini);

  return cfg;
}

std::string render_ini(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[run]\n";
  out << "command = " << to_string(cfg.command) << "\n";
  out << "model = " << cfg.model << "\n";
  out << "equilibrium = " << cfg.equilibrium << "\n";
  out << "out = " << cfg.out_dir << "\n";
  out << "seed = " << cfg.sim.seed << "\n";

  out << "\n[params]\n";
  for (const auto& [key, value] : cfg.overrides) out << key << " = " << fmt(value) << "\n";

  const Command cmd = cfg.command;
  if (cmd != Command::Equilibria) {
    out << "\n[noise]\n";
    switch (cfg.noise.kind) {
      case NoiseKind::Full: {
        const Mat2& b = cfg.noise.slopes;
        out << "b11 = " << fmt(b.a11) << "\nb12 = " << fmt(b.a12) << "\nb21 = " << fmt(b.a21)
            << "\nb22 = " << fmt(b.a22) << "\n";
        break;
      }
      case NoiseKind::Spiral:
        out << "alpha = " << fmt(cfg.noise.alpha) << "\nbeta = " << fmt(cfg.noise.beta) << "\n";
        break;
      case NoiseKind::Diagonal:
        out << "sigma1 = " << fmt(cfg.noise.sigma1) << "\nsigma2 = " << fmt(cfg.noise.sigma2)
            << "\n";
        break;
    }
  }

  if (cmd == Command::Simulate) {
    out << "\n[sim]\n";
    out << "h = " << fmt(cfg.sim.h) << "\n";
    out << "steps = " << cfg.sim.steps << "\n";
    out << "scheme = " << tumor_sde::to_string(cfg.sim.scheme) << "\n";
    if (cfg.sim.initial) {
      out << "x0 = " << fmt(cfg.sim.initial->x) << "\n";
      out << "y0 = " << fmt(cfg.sim.initial->y) << "\n";
    }
    out << "dynamics = " << (cfg.sim.linearized ? "linearized" : "nonlinear") << "\n";
  }

  if (cmd == Command::Sweep) {
    const SweepBlock& s = cfg.sweep;
    out << "\n[sweep]\n";
    out << "alpha_min = " << fmt(s.alpha_min) << "\n";
    out << "alpha_max = " << fmt(s.alpha_max) << "\n";
    out << "alpha_step = " << fmt(s.alpha_step) << "\n";
    out << "method = " << tumor_sde::to_string(s.method) << "\n";
    out << "grid_n = " << s.grid_n << "\n";
    out << "mc_paths = " << s.mc_paths << "\n";
    out << "mc_h = " << fmt(s.mc_h) << "\n";
    out << "mc_steps = " << s.mc_steps << "\n";
  }

  if (cmd == Command::Lyapunov || cmd == Command::Stability) {
    const LyapunovBlock& l = cfg.lyapunov;
    out << "\n[lyapunov]\n";
    out << "method = ";
    for (std::size_t i = 0; i < l.methods.size(); ++i)
      out << (i ? "," : "") << tumor_sde::to_string(l.methods[i]);
    out << "\n";
    out << "density = " << (l.density ? "true" : "false") << "\n";
    out << "grid_n = " << l.grid_n << "\n";
    out << "mc_paths = " << l.mc_paths << "\n";
    out << "mc_h = " << fmt(l.mc_h) << "\n";
    out << "mc_steps = " << l.mc_steps << "\n";
  }

  return out.str();
}

}  // namespace tumor_cli

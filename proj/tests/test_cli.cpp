// End-to-end checks for the tumor-sde driver. The binary under test and a
// scratch directory arrive through the environment (TUMOR_SDE_CLI,
// TUMOR_SDE_CLI_WORKDIR); ctest sets both.
#include <doctest.h>

#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string env_or_fail(const char* name) {
  const char* v = std::getenv(name);
  REQUIRE_MESSAGE(v != nullptr, name << " must be set to run the driver tests");
  return v;
}

const std::string& cli_path() {
  static const std::string p = env_or_fail("TUMOR_SDE_CLI");
  return p;
}

fs::path fresh_dir(const std::string& name) {
  static const fs::path root = env_or_fail("TUMOR_SDE_CLI_WORKDIR");
  fs::path dir = root / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

RunResult run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out_file = scratch / "_stdout.txt";
  const fs::path err_file = scratch / "_stderr.txt";
  const std::string cmd = "'" + cli_path() + "' " + args + " > '" + out_file.string() +
                          "' 2> '" + err_file.string() + "'";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = (status >= 0 && status % 256 == 0) ? status / 256 : status;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<double> csv_row(const std::string& line, std::size_t skip_fields) {
  std::vector<double> vals;
  std::istringstream in(line);
  std::string field;
  std::size_t i = 0;
  while (std::getline(in, field, ',')) {
    if (i++ < skip_fields) continue;
    vals.push_back(std::stod(field));
  }
  return vals;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

TEST_SUITE_BEGIN("test_cli.cpp");

TEST_CASE("equilibria: known closed forms, CSV shape, manifest digests") {
  const fs::path dir = fresh_dir("eq_kt");
  RunResult r = run_cli("equilibria --model kuznetsov-taylor --out '" + dir.string() + "'", dir);
  CHECK(r.code == 0);

  const auto rows = lines_of(slurp(dir / "equilibria.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "label,x,y,residual,eig_re1,eig_re2");
  CHECK(rows[1].substr(0, 3) == "P1,");
  CHECK(rows[2].substr(0, 3) == "P2,");
  const auto p1 = csv_row(rows[1], 1);
  const auto p2 = csv_row(rows[2], 1);
  // P1 = (a1/a2, 0) for the default parameter set.
  CHECK(p1[0] == doctest::Approx(0.1181 / 0.3747).epsilon(1e-12));
  CHECK(p1[1] == 0.0);
  CHECK(p2[0] == doctest::Approx(1.5534604346668).epsilon(1e-9));
  CHECK(p2[1] == doctest::Approx(25.226028523924).epsilon(1e-9));
  CHECK(p1[2] <= 1e-9);
  CHECK(p2[2] <= 1e-9);

  // Every emitted file is listed in the manifest with a matching digest.
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["generator"] == "splitmix64");
  std::size_t listed = 0;
  for (const auto& f : manifest["files"]) {
    const std::string name = f["name"];
    CHECK(f["fnv1a64"] == hex64(fnv1a64(slurp(dir / name))));
    ++listed;
  }
  std::size_t emitted = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json" || name.front() == '_') continue;
    ++emitted;
  }
  CHECK(listed == emitted);
}

TEST_CASE("equilibria: bell closed forms") {
  const fs::path dir = fresh_dir("eq_bell");
  RunResult r = run_cli("equilibria --model bell --out '" + dir.string() + "'", dir);
  CHECK(r.code == 0);
  const auto rows = lines_of(slurp(dir / "equilibria.csv"));
  REQUIRE(rows.size() == 3);
  const auto p1 = csv_row(rows[1], 1);
  const auto p2 = csv_row(rows[2], 1);
  CHECK(p1[0] == 0.0);
  CHECK(p1[1] == doctest::Approx(2.0 / 0.95).epsilon(1e-12));
  CHECK(p2[0] == doctest::Approx(5.0 / 28.0).epsilon(1e-12));
  CHECK(p2[1] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("equilibria: interior point can vanish, with a warning") {
  const fs::path dir = fresh_dir("eq_gone");
  spit(dir / "cfg.ini",
       "[run]\nmodel = kuznetsov-taylor\n[params]\na3 = 0\n");
  RunResult r = run_cli("equilibria --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);
  CHECK(lines_of(slurp(dir / "equilibria.csv")).size() == 2);
  CHECK(r.err.find("interior equilibrium") != std::string::npos);
}

TEST_CASE("simulate: files, row count, reproducibility, rerun from the echoed config") {
  const fs::path dir = fresh_dir("sim_a");
  const std::string cfg =
      "[run]\nmodel = kuznetsov-taylor\nequilibrium = P1\nseed = 42\n"
      "[noise]\nb11 = 10\nb12 = -2\nb21 = 2\nb22 = 10\n"
      "[sim]\nh = 0.01\nsteps = 300\nscheme = euler2\n";
  spit(dir / "cfg.ini", cfg);
  RunResult r = run_cli("simulate --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);

  const auto rows = lines_of(slurp(dir / "traj.csv"));
  REQUIRE(rows.size() == 302);
  CHECK(rows[0] == "n,t,x,y");
  for (const char* plot : {"x_vs_n.svg", "y_vs_n.svg", "phase.svg"}) {
    const std::string svg = slurp(dir / plot);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }

  // Same config, fresh directory: byte-identical table.
  const fs::path dir2 = fresh_dir("sim_b");
  spit(dir2 / "cfg.ini", cfg);
  run_cli("simulate --config '" + (dir2 / "cfg.ini").string() + "' --out '" + dir2.string() + "'",
          dir2);
  CHECK(slurp(dir / "traj.csv") == slurp(dir2 / "traj.csv"));

  // Rerun straight from the resolved echo: still byte-identical.
  const fs::path dir3 = fresh_dir("sim_c");
  run_cli("simulate --config '" + (dir / "resolved.ini").string() + "' --out '" + dir3.string() +
              "'",
          dir3);
  CHECK(slurp(dir / "traj.csv") == slurp(dir3 / "traj.csv"));

  // A different seed must change the path.
  const fs::path dir4 = fresh_dir("sim_d");
  spit(dir4 / "cfg.ini", cfg);
  run_cli("simulate --config '" + (dir4 / "cfg.ini").string() + "' --seed 43 --out '" +
              dir4.string() + "'",
          dir4);
  CHECK(slurp(dir / "traj.csv") != slurp(dir4 / "traj.csv"));
}

TEST_CASE("simulate: zero volatility behaves like the deterministic flow") {
  // Around the bell interior point both Jacobian eigenvalues have negative real
  // part, so the deterministic deviation must shrink.
  const fs::path dir = fresh_dir("sim_ode");
  spit(dir / "cfg.ini",
       "[run]\nmodel = bell\nequilibrium = P2\n"
       "[noise]\nb11 = 0\nb12 = 0\nb21 = 0\nb22 = 0\n"
       "[sim]\nh = 0.01\nsteps = 2000\n");
  RunResult r = run_cli("simulate --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);
  const auto rows = lines_of(slurp(dir / "traj.csv"));
  const auto first = csv_row(rows[1], 2);
  const auto last = csv_row(rows.back(), 2);
  const double x2 = 5.0 / 28.0, y2 = 2.5;
  const double d0 = std::hypot(first[0] - x2, first[1] - y2);
  const double d1 = std::hypot(last[0] - x2, last[1] - y2);
  CHECK(d1 < 0.2 * d0);
}

TEST_CASE("simulate: blow-up truncates output, warns, exits zero") {
  const fs::path dir = fresh_dir("sim_blowup");
  spit(dir / "cfg.ini",
       "[run]\nmodel = kuznetsov-taylor\nequilibrium = P1\n"
       "[noise]\nb11 = 0\nb12 = 0\nb21 = 0\nb22 = 0\n"
       "[sim]\nh = 0.01\nsteps = 80000\ndynamics = linearized\n");
  RunResult r = run_cli("simulate --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);
  CHECK(r.err.find("truncated") != std::string::npos);
  CHECK(lines_of(slurp(dir / "traj.csv")).size() < 80001);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  bool noted = false;
  for (const auto& n : manifest["notes"])
    if (n.get<std::string>().find("truncat") != std::string::npos) noted = true;
  CHECK(noted);
}

TEST_CASE("lyapunov: three methods agree and the density table is sane") {
  const fs::path dir = fresh_dir("ly_bell");
  spit(dir / "cfg.ini",
       "[run]\nmodel = bell\nequilibrium = P1\nseed = 7\n"
       "[noise]\nalpha = 3\nbeta = -2\n"
       "[lyapunov]\nmethod = all\ndensity = true\ngrid_n = 2000\n"
       "mc_paths = 2000\nmc_h = 0.001\nmc_steps = 20000\n");
  RunResult r = run_cli("lyapunov --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);

  const auto rows = lines_of(slurp(dir / "lyapunov.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "method,lambda,std_error,sample_count,fallback");
  double closed = 0, grid = 0, mc = 0, mc_se = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto vals = csv_row(rows[i], 1);
    if (rows[i].rfind("closed-form,", 0) == 0) closed = vals[0];
    if (rows[i].rfind("grid,", 0) == 0) grid = vals[0];
    if (rows[i].rfind("mc,", 0) == 0) mc = vals[0], mc_se = vals[1];
  }
  CHECK(closed < 0);
  CHECK(grid < 0);
  CHECK(mc < 0);
  CHECK(std::abs(closed - grid) <= 5e-3);
  CHECK(std::abs(closed - mc) <= 3 * mc_se);

  const auto dens = lines_of(slurp(dir / "density.csv"));
  REQUIRE(dens.size() == 2002);
  CHECK(dens[0] == "theta,p");
  double integral = 0;
  double prev_theta = 0, prev_p = 0;
  for (std::size_t i = 1; i < dens.size(); ++i) {
    const auto vals = csv_row(dens[i], 0);
    CHECK(vals[1] >= 0.0);
    if (i > 1) integral += 0.5 * (vals[1] + prev_p) * (vals[0] - prev_theta);
    prev_theta = vals[0];
    prev_p = vals[1];
  }
  CHECK(prev_theta == doctest::Approx(6.283185307179586).epsilon(1e-12));
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("lyapunov: degenerate direction diffusion falls back to Monte Carlo") {
  const fs::path dir = fresh_dir("ly_degen");
  const std::string base =
      "[run]\nmodel = kuznetsov-taylor\nequilibrium = P1\nseed = 3\n"
      "[noise]\nb11 = 3\nb12 = 0\nb21 = 0\nb22 = 0\n"
      "[lyapunov]\nmethod = closed\nmc_paths = 300\nmc_steps = 20000\n";
  spit(dir / "cfg.ini", base);
  RunResult r = run_cli("lyapunov --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);
  const auto rows = lines_of(slurp(dir / "lyapunov.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].rfind("mc,", 0) == 0);
  CHECK(rows[1].back() == '1');

  // Asking for the density on the same system is a hard failure.
  const fs::path dir2 = fresh_dir("ly_degen_density");
  spit(dir2 / "cfg.ini", base + "density = true\n");
  RunResult r2 = run_cli("lyapunov --config '" + (dir2 / "cfg.ini").string() + "' --out '" +
                             dir2.string() + "'",
                         dir2);
  CHECK(r2.code == 3);
}

TEST_CASE("lyapunov: two Wiener channels reject the density request") {
  const fs::path dir = fresh_dir("ly_twochan");
  spit(dir / "cfg.ini",
       "[run]\nmodel = bell\nequilibrium = P2\n"
       "[noise]\nsigma1 = 0.1\nsigma2 = 0.1\n"
       "[lyapunov]\nmethod = closed\ndensity = true\nmc_paths = 300\nmc_steps = 2000\n");
  RunResult r = run_cli("lyapunov --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 2);
}

TEST_CASE("lyapunov: zero volatility routes to the deterministic eigenvalue") {
  const fs::path dir = fresh_dir("ly_ode");
  spit(dir / "cfg.ini",
       "[run]\nmodel = kuznetsov-taylor\nequilibrium = P1\n"
       "[noise]\nb11 = 0\nb12 = 0\nb21 = 0\nb22 = 0\n"
       "[lyapunov]\nmethod = closed\n");
  RunResult r = run_cli("lyapunov --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);
  const auto rows = lines_of(slurp(dir / "lyapunov.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].rfind("deterministic-eig,", 0) == 0);
  CHECK(csv_row(rows[1], 1)[0] == doctest::Approx(1.3208145182812916).epsilon(1e-12));
}

TEST_CASE("sweep: crossing report matches the published window") {
  const fs::path dir = fresh_dir("sweep_bell");
  spit(dir / "cfg.ini",
       "[run]\nmodel = bell\nequilibrium = P1\n"
       "[noise]\nbeta = -2\n"
       "[sweep]\nalpha_min = -4\nalpha_max = 4\nalpha_step = 0.05\n"
       "method = grid\ngrid_n = 2000\n");
  RunResult r = run_cli("sweep --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);

  const auto rows = lines_of(slurp(dir / "sweep.csv"));
  REQUIRE(rows.size() == 162);
  CHECK(rows[0] == "alpha,lambda,method,diag");
  CHECK(fs::exists(dir / "lambda_vs_alpha.svg"));

  // Published stability window for this point: outside (-2.02, 1.78).
  const auto report = r.out;
  const auto pos = report.find("sign changes");
  REQUIRE(pos != std::string::npos);
  std::istringstream in(report.substr(report.find(':', pos) + 1));
  double c1 = 0, c2 = 0;
  in >> c1 >> c2;
  CHECK(std::abs(c1 - -2.02) <= 0.15);
  CHECK(std::abs(c2 - 1.78) <= 0.15);
}

TEST_CASE("sweep: full-matrix base sweeps its first entry") {
  const fs::path dir = fresh_dir("sweep_b11");
  spit(dir / "cfg.ini",
       "[run]\nmodel = kuznetsov-taylor\nequilibrium = P1\n"
       "[noise]\nb11 = 10\nb12 = -2\nb21 = 2\nb22 = 10\n"
       "[sweep]\nalpha_min = -1\nalpha_max = 1\nalpha_step = 0.5\n"
       "method = grid\ngrid_n = 500\n");
  RunResult r = run_cli("sweep --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);
  const auto rows = lines_of(slurp(dir / "sweep.csv"));
  REQUIRE(rows.size() == 6);
  CHECK(std::stod(rows[1]) == doctest::Approx(-1.0));
  CHECK(std::stod(rows.back()) == doctest::Approx(1.0));
}

TEST_CASE("stability: boundary contradiction at the bell interior point") {
  const fs::path dir = fresh_dir("st_bell_p2");
  spit(dir / "cfg.ini",
       "[run]\nmodel = bell\nequilibrium = P2\nseed = 11\n"
       "[noise]\nsigma1 = 0.1\nsigma2 = 0.1\n"
       "[lyapunov]\nmc_paths = 500\nmc_steps = 20000\n");
  RunResult r = run_cli("stability --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);
  const std::string verdict = slurp(dir / "verdict.txt");
  CHECK(verdict.find("(equals -w1 sigma1^2 here)") != std::string::npos);
  CHECK(verdict.find("first diagonal entry is nonpositive") != std::string::npos);
  CHECK(verdict.find("verdict: inconclusive") != std::string::npos);
  CHECK(verdict.find("monte carlo exponent") != std::string::npos);
  CHECK(verdict.find("verdict: mean-square stable") == std::string::npos);
}

TEST_CASE("stability: quadratic certificate succeeds on a contracting interior point") {
  const fs::path dir = fresh_dir("st_ms");
  spit(dir / "cfg.ini",
       "[run]\nmodel = vladar-gonzalez\nequilibrium = 1\n"
       "[noise]\nsigma1 = 0\nsigma2 = 0\n");
  RunResult r = run_cli("stability --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);
  CHECK(slurp(dir / "verdict.txt").find("verdict: mean-square stable") != std::string::npos);
}

TEST_CASE("stability: pathwise verdicts from the exponent sign") {
  const fs::path dir = fresh_dir("st_unstable");
  spit(dir / "cfg.ini",
       "[run]\nmodel = bell\nequilibrium = P1\n"
       "[noise]\nalpha = 0\nbeta = -2\n");
  RunResult r = run_cli("stability --config '" + (dir / "cfg.ini").string() + "' --out '" +
                            dir.string() + "'",
                        dir);
  CHECK(r.code == 0);
  CHECK(slurp(dir / "verdict.txt").find("verdict: unstable") != std::string::npos);

  const fs::path dir2 = fresh_dir("st_stable");
  spit(dir2 / "cfg.ini",
       "[run]\nmodel = bell\nequilibrium = P1\n"
       "[noise]\nalpha = 3\nbeta = -2\n");
  RunResult r2 = run_cli("stability --config '" + (dir2 / "cfg.ini").string() + "' --out '" +
                             dir2.string() + "'",
                         dir2);
  CHECK(r2.code == 0);
  CHECK(slurp(dir2 / "verdict.txt").find("verdict: asymptotically stable") != std::string::npos);
}

TEST_CASE("configuration and flag errors exit with code 2") {
  const fs::path dir = fresh_dir("errs");

  SUBCASE("missing model") {
    RunResult r = run_cli("equilibria --out '" + dir.string() + "'", dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("model") != std::string::npos);
  }
  SUBCASE("unknown key") {
    spit(dir / "cfg.ini", "[run]\nmodel = bell\n[noise]\nslope = 3\n");
    RunResult r = run_cli("lyapunov --config '" + (dir / "cfg.ini").string() + "' --out '" +
                              dir.string() + "'",
                          dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("unknown key") != std::string::npos);
  }
  SUBCASE("unknown section") {
    spit(dir / "cfg.ini", "[run]\nmodel = bell\n[plotting]\ndpi = 300\n");
    RunResult r = run_cli("lyapunov --config '" + (dir / "cfg.ini").string() + "' --out '" +
                              dir.string() + "'",
                          dir);
    CHECK(r.code == 2);
  }
  SUBCASE("malformed line carries its location") {
    spit(dir / "cfg.ini", "[run]\nmodel = bell\nnot a pair\n");
    RunResult r = run_cli("equilibria --config '" + (dir / "cfg.ini").string() + "' --out '" +
                              dir.string() + "'",
                          dir);
    CHECK(r.code == 2);
    CHECK(r.err.find(":3") != std::string::npos);
  }
  SUBCASE("labelled selector on a numerically solved registry entry") {
    RunResult r = run_cli("stability --model volterra --out '" + dir.string() + "'", dir);
    CHECK(r.code == 2);
  }
  SUBCASE("unknown subcommand") {
    RunResult r = run_cli("plot --model bell --out '" + dir.string() + "'", dir);
    CHECK(r.code == 2);
  }
  SUBCASE("missing config file") {
    RunResult r = run_cli("lyapunov --config '" + (dir / "absent.ini").string() + "' --out '" +
                              dir.string() + "'",
                          dir);
    CHECK(r.code == 2);
  }
}

TEST_CASE("seed flag overrides the config seed") {
  const std::string cfg =
      "[run]\nmodel = bell\nequilibrium = P1\nseed = 5\n"
      "[noise]\nalpha = 3\nbeta = -2\n"
      "[lyapunov]\nmethod = mc\nmc_paths = 200\nmc_steps = 2000\n";
  const fs::path a = fresh_dir("seed_a");
  const fs::path b = fresh_dir("seed_b");
  const fs::path c = fresh_dir("seed_c");
  spit(a / "cfg.ini", cfg);
  spit(b / "cfg.ini", cfg);
  spit(c / "cfg.ini", cfg);
  run_cli("lyapunov --config '" + (a / "cfg.ini").string() + "' --out '" + a.string() + "'", a);
  run_cli("lyapunov --config '" + (b / "cfg.ini").string() + "' --seed 6 --out '" + b.string() +
              "'",
          b);
  run_cli("lyapunov --config '" + (c / "cfg.ini").string() + "' --seed 5 --out '" + c.string() +
              "'",
          c);
  CHECK(slurp(a / "lyapunov.csv") != slurp(b / "lyapunov.csv"));
  CHECK(slurp(a / "lyapunov.csv") == slurp(c / "lyapunov.csv"));
}

TEST_SUITE_END();

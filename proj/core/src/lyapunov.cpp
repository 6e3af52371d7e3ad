#include "tumor_sde/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "tumor_sde/errors.hpp"

namespace tumor_sde {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i)
    acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

}  // namespace

double AngularCoefficients::min_abs_q4() const {
  // q4 = c + R cos(2 theta - phase) ranges over [c - R, c + R].
  const double c = t4[0];
  const double R = std::hypot(t4[1], t4[2]);
  if (c - R <= 0.0 && 0.0 <= c + R) return 0.0;
  return std::min(std::fabs(c - R), std::fabs(c + R));
}

AngularCoefficients angular_coeffs(const LinearSDE& sys) {
  if (sys.form == NoiseForm::TwoWiener)
    throw UnsupportedNoiseError(
        "angular_coeffs: the direction-process reduction needs a single shared "
        "Wiener channel");
  const Mat2& A = sys.A;
  const Mat2& B = sys.B;
  AngularCoefficients c;
  c.A = A;
  c.B = B;
  c.t1 = {0.5 * (A.a11 + A.a22), 0.5 * (A.a11 - A.a22), 0.5 * (A.a12 + A.a21)};
  c.t2 = {0.5 * (B.a11 + B.a22), 0.5 * (B.a11 - B.a22), 0.5 * (B.a12 + B.a21)};
  c.t3 = {0.5 * (A.a21 - A.a12), 0.5 * (A.a21 + A.a12), 0.5 * (A.a22 - A.a11)};
  c.t4 = {0.5 * (B.a21 - B.a12), 0.5 * (B.a21 + B.a12), 0.5 * (B.a22 - B.a11)};
  c.t5 = {0.0, B.a11 - B.a22, -(B.a12 + B.a21)};
  return c;
}

double PhaseDensity::min_value() const {
  return p.empty() ? 0.0 : *std::min_element(p.begin(), p.end());
}

double PhaseDensity::integral() const { return trapezoid(theta, p); }

namespace {

void require_node_count(std::size_t n) {
  if (n < 8) throw ParameterError("density grid needs at least 8 intervals");
}

void require_nondegenerate(const AngularCoefficients& coeffs) {
  if (coeffs.min_abs_q4() < kDegenerateQ4Cutoff)
    throw DegenerateDiffusionError(
        "direction-process diffusion q4 passes below the cutoff; the "
        "stationary-density formulas divide by q4^2");
}

void normalize(PhaseDensity& d) {
  const double mass = d.integral();
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw NumericError("stationary density has nonpositive or non-finite mass");
  for (double& v : d.p) v /= mass;
}

}  // namespace

PhaseDensity stationary_density_closed(const LinearSDE& sys, std::size_t n) {
  require_node_count(n);
  const AngularCoefficients coeffs = angular_coeffs(sys);
  require_nondegenerate(coeffs);

  const double h = kTwoPi / static_cast<double>(n);
  std::vector<double> theta(n + 1), drift_ratio(n + 1), D(n + 1), I(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = h * static_cast<double>(i);
    theta[i] = t;
    const double q4 = coeffs.q4(t);
    drift_ratio[i] =
        (coeffs.q3(t) - coeffs.q2(t) * q4 - q4 * coeffs.q5(t)) / (q4 * q4);
  }
  // D(t) = exp(-2 * cumulative integral of the drift ratio), then the running
  // mass of D itself feeds the periodicity constant eta.
  double psi = 0.0;
  D[0] = 1.0;
  I[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    psi += -2.0 * 0.5 * h * (drift_ratio[i] + drift_ratio[i - 1]);
    D[i] = std::exp(psi);
    I[i] = I[i - 1] + 0.5 * h * (D[i] + D[i - 1]);
  }
  const double eta = (D[n] - 1.0) / I[n];

  PhaseDensity out;
  out.theta = std::move(theta);
  out.p.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double q4 = coeffs.q4(out.theta[i]);
    out.p[i] = (1.0 + eta * I[i]) / (D[i] * q4 * q4);
  }
  out.method = DensityMethod::ClosedForm;
  out.period = kTwoPi;
  normalize(out);
  return out;
}

PhaseDensity special_case_density(const LinearSDE& sys, std::size_t n) {
  require_node_count(n);
  if (sys.form == NoiseForm::TwoWiener)
    throw UnsupportedNoiseError("special_case_density: single-channel systems only");
  const Mat2& B = sys.B;
  if (std::fabs(B.a11 - B.a22) > 1e-12 || std::fabs(B.a12 + B.a21) > 1e-12)
    throw ParameterError(
        "special_case_density: volatility must have the rotation form "
        "[[alpha, -beta], [beta, alpha]]");
  const double alpha = B.a11;
  const double beta = B.a21;
  if (std::fabs(beta) < kDegenerateQ4Cutoff)
    throw DegenerateDiffusionError("special_case_density: beta is degenerate");

  const Mat2& A = sys.A;
  const double beta2 = beta * beta;
  const double linear = A.a21 - A.a12 - alpha * beta;
  const double c_cos = 0.5 * (A.a11 - A.a22);
  const double c_sin = 0.5 * (A.a21 - A.a12);

  PhaseDensity out;
  const double h = kTwoPi / static_cast<double>(n);
  out.theta.resize(n + 1);
  out.p.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = h * static_cast<double>(i);
    out.theta[i] = t;
    out.p[i] = (1.0 / beta2) *
               std::exp((linear * t + c_cos * std::cos(2.0 * t) + c_sin * std::sin(2.0 * t)) /
                        beta2);
  }
  out.method = DensityMethod::ClosedForm;
  out.period = kTwoPi;
  out.non_periodic_flag = std::fabs(linear) > 1e-12;
  normalize(out);
  return out;
}

namespace {

struct GridPass {
  // p(i) = (flux + q4(i)^2 p(i-1) / (2h)) * F(i); returns p as a linear
  // function of the seed and the flux so that one periodicity solve fixes both.
  static std::vector<double> run(const AngularCoefficients& coeffs, double origin,
                                 double period, std::size_t n, double seed, double flux) {
    const double h = period / static_cast<double>(n);
    std::vector<double> p(n + 1);
    p[0] = seed;
    for (std::size_t i = 1; i <= n; ++i) {
      const double t = origin + h * static_cast<double>(i);
      const double q4 = coeffs.q4(t);
      const double q4sq = q4 * q4;
      const double denom =
          2.0 * h * (-coeffs.q3(t) + coeffs.q2(t) * q4 + q4 * coeffs.q5(t)) + q4sq;
      if (!(std::fabs(denom) > 0.0) || !std::isfinite(denom))
        throw NumericError("grid scheme denominator vanished; refine the grid");
      const double F = 2.0 * h / denom;
      p[i] = (flux + q4sq * p[i - 1] / (2.0 * h)) * F;
    }
    return p;
  }
};

}  // namespace

PhaseDensity stationary_density_grid(const LinearSDE& sys, const GridOptions& opt) {
  require_node_count(opt.n);
  const AngularCoefficients coeffs = angular_coeffs(sys);
  require_nondegenerate(coeffs);

  const double period = opt.projective ? M_PI : kTwoPi;
  const std::size_t n = opt.n;

  // The recurrence is linear in (seed, flux); the periodic solution follows
  // from two probing passes and p(n) = p(0).
  const double with_seed = GridPass::run(coeffs, opt.origin, period, n, 1.0, 0.0).back();
  const double with_flux = GridPass::run(coeffs, opt.origin, period, n, 0.0, 1.0).back();
  double flux = 0.0;
  if (std::fabs(with_flux) > 1e-300) {
    flux = (1.0 - with_seed) / with_flux;
  } else if (std::fabs(with_seed - 1.0) > 1e-9) {
    throw NumericError("grid scheme periodicity condition is unsolvable");
  }

  PhaseDensity out;
  out.p = GridPass::run(coeffs, opt.origin, period, n, 1.0, flux);
  out.theta.resize(n + 1);
  const double h = period / static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i)
    out.theta[i] = opt.origin + h * static_cast<double>(i);
  out.method = DensityMethod::GridScheme;
  out.period = period;
  if (out.min_value() <= 0.0)
    throw NumericError("grid scheme produced a nonpositive density node");
  normalize(out);
  return out;
}

PhaseDensity mc_angle_histogram(const LinearSDE& sys, const HistogramOptions& opt,
                                std::uint64_t seed) {
  if (opt.bins < 8) throw ParameterError("mc_angle_histogram: needs at least 8 bins");
  if (!(opt.h > 0.0)) throw ParameterError("mc_angle_histogram: step size must be positive");
  if (opt.steps <= opt.burn_in)
    throw ParameterError("mc_angle_histogram: burn-in swallows every step");

  const SdeSystem sde = make_system(sys);
  RngState rng(seed);
  const double sqrt_h = std::sqrt(opt.h);
  Vec2 u{1.0, 0.0};
  std::vector<double> counts(opt.bins, 0.0);
  const double width = kTwoPi / static_cast<double>(opt.bins);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < opt.steps; ++i) {
    const auto [z1, z2] = gauss_pair(rng);
    const double g1 = z1 * sqrt_h;
    const double g2 = (sys.form == NoiseForm::OneWiener) ? g1 : z2 * sqrt_h;
    Vec2 next = step_euler(sde, u, opt.h, g1, g2);
    const double r = next.norm();
    if (!(r > 0.0) || !std::isfinite(r))
      throw NumericError("mc_angle_histogram: direction process left the circle");
    u = next / r;
    if (i < opt.burn_in) continue;
    double angle = std::atan2(u.y, u.x);
    if (angle < 0.0) angle += kTwoPi;
    std::size_t bin = static_cast<std::size_t>(angle / width);
    if (bin >= opt.bins) bin = opt.bins - 1;
    counts[bin] += 1.0;
    ++kept;
  }

  PhaseDensity out;
  out.theta.resize(opt.bins + 1);
  out.p.resize(opt.bins + 1);
  for (std::size_t b = 0; b < opt.bins; ++b) {
    out.theta[b] = width * static_cast<double>(b);
    out.p[b] = counts[b] / (static_cast<double>(kept) * width);
  }
  out.theta[opt.bins] = kTwoPi;
  out.p[opt.bins] = out.p[0];
  out.method = DensityMethod::Histogram;
  out.period = kTwoPi;
  return out;
}

const char* to_string(LyapunovMethod method) {
  switch (method) {
    case LyapunovMethod::ClosedForm: return "closed-form";
    case LyapunovMethod::GridScheme: return "grid";
    case LyapunovMethod::MonteCarlo: return "mc";
    case LyapunovMethod::DeterministicEig: return "deterministic-eig";
  }
  return "?";
}

double lyapunov_from_density(const AngularCoefficients& coeffs, const PhaseDensity& density) {
  std::vector<double> integrand(density.theta.size());
  for (std::size_t i = 0; i < density.theta.size(); ++i)
    integrand[i] = coeffs.growth(density.theta[i]) * density.p[i];
  return trapezoid(density.theta, integrand);
}

LyapunovResult lyapunov_closed(const LinearSDE& sys, std::size_t n) {
  const AngularCoefficients coeffs = angular_coeffs(sys);
  const PhaseDensity density = stationary_density_closed(sys, n);
  LyapunovResult r;
  r.lambda = lyapunov_from_density(coeffs, density);
  r.method = LyapunovMethod::ClosedForm;
  r.sample_count = density.theta.size();
  r.density_min = density.min_value();
  return r;
}

LyapunovResult lyapunov_grid(const LinearSDE& sys, const GridOptions& opt) {
  const AngularCoefficients coeffs = angular_coeffs(sys);
  const PhaseDensity density = stationary_density_grid(sys, opt);
  LyapunovResult r;
  r.lambda = lyapunov_from_density(coeffs, density);
  r.method = LyapunovMethod::GridScheme;
  r.sample_count = density.theta.size();
  r.density_min = density.min_value();
  return r;
}

namespace {

// Direct-arithmetic stepper for the linear system; the Monte Carlo estimator
// spends essentially all of its time here.
struct LinearStepper {
  Mat2 A, B, A2, B2, C;
  NoiseForm form;
  Scheme scheme;
  double h, sqrt_h;

  LinearStepper(const LinearSDE& sys, const SimConfig& cfg)
      : A(sys.A),
        B(sys.B),
        A2(sys.A * sys.A),
        B2(sys.B * sys.B),
        C(sys.A * sys.B + sys.B * sys.A),
        form(sys.form),
        scheme(cfg.scheme),
        h(cfg.h),
        sqrt_h(std::sqrt(cfg.h)) {}

  Vec2 step(const Vec2& u, double z1, double z2) const {
    const double G1 = z1 * sqrt_h;
    const double G2 = (form == NoiseForm::OneWiener) ? G1 : z2 * sqrt_h;
    const Vec2 f = A * u;
    const Vec2 g = B * u;
    switch (scheme) {
      case Scheme::Euler:
        return {u.x + h * f.x + G1 * g.x, u.y + h * f.y + G2 * g.y};
      case Scheme::Euler2: {
        const double x = u.x + h * f.x + G1 * g.x + 0.5 * B.a11 * g.x * (G1 * G1 - h) +
                         0.5 * h * h * A.a11 * f.x +
                         0.5 * h * G1 * (A.a11 * g.x + B.a11 * f.x);
        const double y = u.y + h * f.y + G2 * g.y + 0.5 * B.a22 * g.y * (G2 * G2 - h) +
                         0.5 * h * h * A.a22 * f.y +
                         0.5 * h * G2 * (A.a22 * g.y + B.a22 * f.y);
        return {x, y};
      }
      case Scheme::Euler2Cross: break;
    }
    if (form == NoiseForm::OneWiener) {
      const double half_gg = 0.5 * (G1 * G1 - h);
      const double half_hh = 0.5 * h * h;
      const double half_hg = 0.5 * h * G1;
      const Vec2 b2u = B2 * u;
      const Vec2 a2u = A2 * u;
      const Vec2 cu = C * u;
      return {u.x + h * f.x + G1 * g.x + half_gg * b2u.x + half_hh * a2u.x + half_hg * cu.x,
              u.y + h * f.y + G2 * g.y + half_gg * b2u.y + half_hh * a2u.y + half_hg * cu.y};
    }
    const Vec2 a2u = A2 * u;
    const double x = u.x + h * f.x + G1 * g.x + 0.5 * B.a11 * g.x * (G1 * G1 - h) +
                     0.5 * B.a12 * g.y * G1 * G2 + 0.5 * h * h * a2u.x +
                     0.5 * h * (A.a11 * g.x * G1 + A.a12 * g.y * G2 +
                                (B.a11 * f.x + B.a12 * f.y) * G1);
    const double y = u.y + h * f.y + G2 * g.y + 0.5 * B.a22 * g.y * (G2 * G2 - h) +
                     0.5 * B.a21 * g.x * G1 * G2 + 0.5 * h * h * a2u.y +
                     0.5 * h * (A.a21 * g.x * G1 + A.a22 * g.y * G2 +
                                (B.a21 * f.x + B.a22 * f.y) * G2);
    return {x, y};
  }
};

}  // namespace

LyapunovResult lyapunov_mc(const LinearSDE& sys, const SimConfig& cfg, std::size_t paths,
                           std::uint64_t seed) {
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h))
    throw ParameterError("lyapunov_mc: step size must be positive and finite");
  if (cfg.steps < 1) throw ParameterError("lyapunov_mc: step count must be at least 1");
  if (paths < 1) throw ParameterError("lyapunov_mc: needs at least 1 path");

  Vec2 u0 = cfg.initial;
  const double n0 = u0.norm();
  u0 = (n0 > 0.0) ? u0 / n0 : Vec2{1.0, 0.0};

  const LinearStepper stepper(sys, cfg);
  const double T = cfg.h * static_cast<double>(cfg.steps);
  std::vector<double> lambdas(paths);
  for (std::size_t k = 0; k < paths; ++k) {
    RngState rng(seed + static_cast<std::uint64_t>(k));
    Vec2 u = u0;
    double acc = 0.0;
    for (std::size_t i = 0; i < cfg.steps; ++i) {
      const auto [z1, z2] = gauss_pair(rng);
      const Vec2 v = stepper.step(u, z1, z2);
      const double r2 = v.x * v.x + v.y * v.y;
      if (!(r2 > 0.0) || !std::isfinite(r2))
        throw NumericError("lyapunov_mc: renormalized direction left the circle");
      const double r = std::sqrt(r2);
      acc += std::log(r);
      u = v / r;
    }
    lambdas[k] = acc / T;
  }

  const double mean =
      std::accumulate(lambdas.begin(), lambdas.end(), 0.0) / static_cast<double>(paths);
  LyapunovResult r;
  r.lambda = mean;
  r.method = LyapunovMethod::MonteCarlo;
  r.sample_count = paths;
  if (paths > 1) {
    double var = 0.0;
    for (double v : lambdas) var += (v - mean) * (v - mean);
    var /= static_cast<double>(paths - 1);
    r.std_error = std::sqrt(var / static_cast<double>(paths));
  } else {
    r.note = "single path: no standard error";
  }
  return r;
}

LyapunovResult deterministic_eig(const LinearSDE& sys) {
  LyapunovResult r;
  r.lambda = sys.A.max_real_eig();
  r.method = LyapunovMethod::DeterministicEig;
  r.sample_count = 1;
  return r;
}

LyapunovResult top_lyapunov(const LinearSDE& sys, LyapunovMethod preferred,
                            const GridOptions& opt, const SimConfig& mc_cfg,
                            std::size_t mc_paths, std::uint64_t seed) {
  if (sys.B.zero()) {
    LyapunovResult r = deterministic_eig(sys);
    if (preferred != LyapunovMethod::DeterministicEig) {
      r.fallback_used = true;
      r.note = "volatility is zero; routed to the deterministic eigenvalue";
    }
    return r;
  }
  switch (preferred) {
    case LyapunovMethod::DeterministicEig:
      return deterministic_eig(sys);
    case LyapunovMethod::MonteCarlo:
      return lyapunov_mc(sys, mc_cfg, mc_paths, seed);
    case LyapunovMethod::ClosedForm:
    case LyapunovMethod::GridScheme:
      break;
  }
  if (sys.form == NoiseForm::TwoWiener) {
    LyapunovResult r = lyapunov_mc(sys, mc_cfg, mc_paths, seed);
    r.fallback_used = true;
    r.note = "two Wiener channels: density methods unavailable, used Monte Carlo";
    return r;
  }
  try {
    return preferred == LyapunovMethod::ClosedForm ? lyapunov_closed(sys, opt.n)
                                                   : lyapunov_grid(sys, opt);
  } catch (const DegenerateDiffusionError& err) {
    LyapunovResult r = lyapunov_mc(sys, mc_cfg, mc_paths, seed);
    r.fallback_used = true;
    r.note = err.what();
    return r;
  }
}

std::vector<double> alpha_range(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ParameterError("alpha_range: step must be positive");
  if (hi < lo) throw ParameterError("alpha_range: empty range");
  const std::size_t count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> alphas(count);
  for (std::size_t i = 0; i < count; ++i) alphas[i] = lo + step * static_cast<double>(i);
  return alphas;
}

namespace {

SweepTable sweep_impl(const ModelDefinition& model, const Equilibrium& eq,
                      SweepFamily family, double beta, const Mat2& base,
                      const std::vector<double>& alphas, LyapunovMethod method,
                      const GridOptions& opt, const SimConfig& mc_cfg, std::size_t mc_paths,
                      std::uint64_t seed) {
  SweepTable table;
  table.family = family;
  table.beta = beta;
  table.base = base;
  table.rows.reserve(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double alpha = alphas[i];
    Mat2 slopes;
    if (family == SweepFamily::Spiral) {
      slopes = {alpha, -beta, beta, alpha};
    } else {
      slopes = base;
      slopes.a11 = alpha;
    }
    SweepRow row;
    row.alpha = alpha;
    try {
      const LinearSDE lin = linearize_at(model, eq, slopes);
      const LyapunovResult r =
          top_lyapunov(lin, method, opt, mc_cfg, mc_paths, seed + i);
      row.lambda = r.lambda;
      row.method = r.method;
      row.diag = (r.method == LyapunovMethod::MonteCarlo) ? r.std_error : r.density_min;
      row.note = r.note;
    } catch (const std::exception& err) {
      row.lambda = std::numeric_limits<double>::quiet_NaN();
      row.method = method;
      row.ok = false;
      row.note = err.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace

SweepTable sweep_alpha(const ModelDefinition& model, const Equilibrium& eq, double beta,
                       const std::vector<double>& alphas, LyapunovMethod method,
                       const GridOptions& opt, const SimConfig& mc_cfg, std::size_t mc_paths,
                       std::uint64_t seed) {
  return sweep_impl(model, eq, SweepFamily::Spiral, beta, Mat2{}, alphas, method, opt,
                    mc_cfg, mc_paths, seed);
}

SweepTable sweep_b11(const ModelDefinition& model, const Equilibrium& eq, const Mat2& base,
                     const std::vector<double>& alphas, LyapunovMethod method,
                     const GridOptions& opt, const SimConfig& mc_cfg, std::size_t mc_paths,
                     std::uint64_t seed) {
  return sweep_impl(model, eq, SweepFamily::B11Only, 0.0, base, alphas, method, opt, mc_cfg,
                    mc_paths, seed);
}

std::vector<double> sign_changes(const SweepTable& table) {
  std::vector<double> roots;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const SweepRow& a = table.rows[i - 1];
    const SweepRow& b = table.rows[i];
    if (!a.ok || !b.ok || !std::isfinite(a.lambda) || !std::isfinite(b.lambda)) continue;
    if (a.lambda == 0.0) {
      if (roots.empty() || roots.back() != a.alpha) roots.push_back(a.alpha);
      continue;
    }
    if (a.lambda * b.lambda < 0.0) {
      const double root =
          a.alpha + (b.alpha - a.alpha) * a.lambda / (a.lambda - b.lambda);
      roots.push_back(root);
    }
  }
  if (!table.rows.empty() && table.rows.back().ok && table.rows.back().lambda == 0.0)
    roots.push_back(table.rows.back().alpha);
  return roots;
}

void write_sweep_csv(const SweepTable& table, std::ostream& out) {
  out << "alpha,lambda,method,diag\n";
  char buf[160];
  for (const SweepRow& row : table.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g\n", row.alpha, row.lambda,
                  to_string(row.method), row.diag);
    out << buf;
  }
}

void write_density_csv(const PhaseDensity& density, std::ostream& out) {
  out << "theta,p\n";
  char buf[96];
  for (std::size_t i = 0; i < density.theta.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", density.theta[i], density.p[i]);
    out << buf;
  }
}

}  // namespace tumor_sde

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tumor_sde/linalg.hpp"
#include "tumor_sde/linearize.hpp"
#include "tumor_sde/simulate.hpp"

namespace tumor_sde {

// Angular projections of du = Au dt + Bu dW in polar coordinates:
//   q1 = a11 cos^2 + (a12+a21) cos sin + a22 sin^2      (radial drift)
//   q2 = b11 cos^2 + (b12+b21) cos sin + b22 sin^2      (radial noise)
//   q3 = a21 cos^2 + (a22-a11) cos sin - a12 sin^2      (angular drift)
//   q4 = b21 cos^2 + (b22-b11) cos sin - b12 sin^2      (angular noise)
//   q5 = -(b12+b21) sin 2t - (b22-b11) cos 2t
// Each is stored as a Fourier triple {constant, cos 2t, sin 2t}.
struct AngularCoefficients {
  Mat2 A;
  Mat2 B;
  std::array<double, 3> t1, t2, t3, t4, t5;

  double q1(double theta) const { return eval(t1, theta); }
  double q2(double theta) const { return eval(t2, theta); }
  double q3(double theta) const { return eval(t3, theta); }
  double q4(double theta) const { return eval(t4, theta); }
  double q5(double theta) const { return eval(t5, theta); }

  // Integrand of the top exponent: q1 + (q4^2 - q2^2) / 2.
  double growth(double theta) const {
    const double v2 = q2(theta), v4 = q4(theta);
    return q1(theta) + 0.5 * (v4 * v4 - v2 * v2);
  }

  double min_abs_q4() const;

 private:
  static double eval(const std::array<double, 3>& t, double theta) {
    return t[0] + t[1] * std::cos(2.0 * theta) + t[2] * std::sin(2.0 * theta);
  }
};

// Throws UnsupportedNoiseError for two-Wiener systems.
AngularCoefficients angular_coeffs(const LinearSDE& sys);

inline constexpr double kDegenerateQ4Cutoff = 1e-8;

enum class DensityMethod { ClosedForm, GridScheme, Histogram };

struct PhaseDensity {
  std::vector<double> theta;  // ascending, closes the period: theta.back() - theta.front() = period
  std::vector<double> p;      // p.back() == p.front(), trapezoid-normalized to 1
  DensityMethod method = DensityMethod::ClosedForm;
  double period = 0.0;
  bool non_periodic_flag = false;  // set by the verbatim special-case formula

  double min_value() const;
  double integral() const;  // trapezoid
};

struct GridOptions {
  std::size_t n = 2000;
  double origin = 0.0;
  bool projective = false;  // solve on [0, pi) instead of [0, 2*pi)
};

// Quadrature construction of the stationary direction density:
//   D(t)   = exp(-2 * integral_0^t (q3 - q2 q4 - q4 q5) / q4^2)
//   p(t)  ~  (1 + eta * integral_0^t D) / (D(t) q4(t)^2),
//   eta    = (D(2 pi) - 1) / integral_0^{2 pi} D,
// normalized to unit mass.  Throws DegenerateDiffusionError when |q4| dips
// below the cutoff.
PhaseDensity stationary_density_closed(const LinearSDE& sys, std::size_t n = 2000);

// Verbatim closed form for B = [[alpha, -beta], [beta, alpha]]:
//   p ~ (1/beta^2) exp(((a21 - a12 - alpha beta) t
//        + (a11 - a22) cos 2t / 2 + (a21 - a12) sin 2t / 2) / beta^2).
// The t-linear term breaks periodicity whenever a21 - a12 - alpha beta != 0;
// the non_periodic_flag reports that and the other two methods stay
// authoritative.
PhaseDensity special_case_density(const LinearSDE& sys, std::size_t n = 2000);

// Backward-difference scheme
//   p(i) = (flux + q4(i)^2 p(i-1) / (2h)) * F(i),
//   F(i) = 2h / (2h (-q3(i) + q2(i) q4(i) + q4(i) q5(i)) + q4(i)^2),
// with the seed/flux pair fixed by the periodicity condition p(N) = p(0)
// and the result normalized to unit mass.
PhaseDensity stationary_density_grid(const LinearSDE& sys, const GridOptions& opt = {});

struct HistogramOptions {
  std::size_t bins = 360;
  double h = 1e-3;
  std::size_t steps = 400000;
  std::size_t burn_in = 20000;
};
PhaseDensity mc_angle_histogram(const LinearSDE& sys, const HistogramOptions& opt,
                                std::uint64_t seed);

enum class LyapunovMethod { ClosedForm, GridScheme, MonteCarlo, DeterministicEig };

const char* to_string(LyapunovMethod method);

struct LyapunovResult {
  double lambda = 0.0;
  LyapunovMethod method = LyapunovMethod::ClosedForm;
  double std_error = 0.0;        // Monte Carlo only
  std::size_t sample_count = 0;  // grid nodes or path count
  double density_min = 0.0;      // density methods only
  bool fallback_used = false;
  std::string note;
};

double lyapunov_from_density(const AngularCoefficients& coeffs, const PhaseDensity& density);

LyapunovResult lyapunov_closed(const LinearSDE& sys, std::size_t n = 2000);
LyapunovResult lyapunov_grid(const LinearSDE& sys, const GridOptions& opt = {});

// Renormalized-radius estimator: Euler-family steps on u, one log-growth
// accumulation per step, mean and standard error across paths.
LyapunovResult lyapunov_mc(const LinearSDE& sys, const SimConfig& cfg, std::size_t paths,
                           std::uint64_t seed);

LyapunovResult deterministic_eig(const LinearSDE& sys);

// Dispatch: B = 0 -> deterministic eigenvalue; degenerate q4 -> Monte Carlo
// fallback (flagged); otherwise the requested density method.
LyapunovResult top_lyapunov(const LinearSDE& sys, LyapunovMethod preferred,
                            const GridOptions& opt = {}, const SimConfig& mc_cfg = {},
                            std::size_t mc_paths = 10000, std::uint64_t seed = 0);

enum class SweepFamily { Spiral, B11Only };

struct SweepRow {
  double alpha = 0.0;
  double lambda = 0.0;
  LyapunovMethod method = LyapunovMethod::ClosedForm;
  double diag = 0.0;  // std error (mc) or min density (closed/grid)
  bool ok = true;
  std::string note;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  SweepFamily family = SweepFamily::Spiral;
  double beta = -2.0;
  Mat2 base;  // B11Only: the fixed slope matrix whose b11 entry is swept
};

std::vector<double> alpha_range(double lo, double hi, double step);

// B(alpha) = [[alpha, -beta], [beta, alpha]] anchored at eq.
SweepTable sweep_alpha(const ModelDefinition& model, const Equilibrium& eq, double beta,
                       const std::vector<double>& alphas, LyapunovMethod method,
                       const GridOptions& opt = {}, const SimConfig& mc_cfg = {},
                       std::size_t mc_paths = 10000, std::uint64_t seed = 0);

// B(alpha) = base with b11 replaced by alpha; the other entries stay fixed.
SweepTable sweep_b11(const ModelDefinition& model, const Equilibrium& eq, const Mat2& base,
                     const std::vector<double>& alphas, LyapunovMethod method,
                     const GridOptions& opt = {}, const SimConfig& mc_cfg = {},
                     std::size_t mc_paths = 10000, std::uint64_t seed = 0);

// Zero crossings of lambda(alpha), located by linear interpolation between
// adjacent grid points with opposite signs.
std::vector<double> sign_changes(const SweepTable& table);

// Header alpha,lambda,method,diag / theta,p; 17 significant digits.
void write_sweep_csv(const SweepTable& table, std::ostream& out);
void write_density_csv(const PhaseDensity& density, std::ostream& out);

}  // namespace tumor_sde

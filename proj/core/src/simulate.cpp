#include "tumor_sde/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "tumor_sde/errors.hpp"

namespace tumor_sde {

std::uint64_t RngState::next_u64() {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double RngState::uniform() {
  // 53-bit mantissa shifted into (0, 1]; never returns 0, so log() is safe.
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

std::pair<double, double> gauss_from_uniforms(double u1, double u2) {
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * M_PI * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

std::pair<double, double> gauss_pair(RngState& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return gauss_from_uniforms(u1, u2);
}

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Euler: return "euler";
    case Scheme::Euler2: return "euler2";
    case Scheme::Euler2Cross: return "euler2-cross";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "euler") return Scheme::Euler;
  if (name == "euler2") return Scheme::Euler2;
  if (name == "euler2-cross") return Scheme::Euler2Cross;
  throw ParameterError("unknown scheme '" + name + "'");
}

SdeSystem make_system(const ModelDefinition& model, const NoiseSpec& noise) {
  SdeSystem sys;
  sys.drift = model.drift;
  sys.drift_jacobian = model.jacobian;
  sys.drift_hessians = model.hessians;
  sys.vol_slopes = noise.slopes;
  sys.vol_offset = noise.offset;
  sys.form = NoiseForm::OneWiener;
  return sys;
}

SdeSystem make_system(const ModelDefinition& model, const Equilibrium& anchor,
                      const DiagonalNoiseSpec& noise) {
  if (noise.sigma1 < 0.0 || noise.sigma2 < 0.0)
    throw ParameterError("make_system: noise intensities must be nonnegative");
  SdeSystem sys;
  sys.drift = model.drift;
  sys.drift_jacobian = model.jacobian;
  sys.drift_hessians = model.hessians;
  sys.vol_slopes = Mat2::diagonal(noise.sigma1, noise.sigma2);
  sys.vol_offset = {-(noise.sigma1 * anchor.state.x), -(noise.sigma2 * anchor.state.y)};
  sys.form = NoiseForm::TwoWiener;
  return sys;
}

SdeSystem make_system(const LinearSDE& lin) {
  SdeSystem sys;
  const Mat2 A = lin.A;
  sys.drift = [A](const Vec2& s) -> Vec2 { return A * s; };
  sys.drift_jacobian = [A](const Vec2&) -> Mat2 { return A; };
  sys.drift_hessians = [](const Vec2&) -> std::array<Mat2, 2> { return {Mat2{}, Mat2{}}; };
  sys.vol_slopes = lin.B;
  sys.vol_offset = {0.0, 0.0};
  sys.form = lin.form;
  return sys;
}

namespace {

Mat2 jacobian_of(const SdeSystem& sys, const Vec2& s) {
  if (sys.drift_jacobian) return sys.drift_jacobian(s);
  const double e = 1e-6;
  const Vec2 fx1 = sys.drift({s.x + e, s.y}), fx0 = sys.drift({s.x - e, s.y});
  const Vec2 fy1 = sys.drift({s.x, s.y + e}), fy0 = sys.drift({s.x, s.y - e});
  return {(fx1.x - fx0.x) / (2.0 * e), (fy1.x - fy0.x) / (2.0 * e),
          (fx1.y - fx0.y) / (2.0 * e), (fy1.y - fy0.y) / (2.0 * e)};
}

std::array<Mat2, 2> hessians_of(const SdeSystem& sys, const Vec2& s) {
  if (sys.drift_hessians) return sys.drift_hessians(s);
  const double e = 1e-4;
  const Vec2 f = sys.drift(s);
  const Vec2 fx1 = sys.drift({s.x + e, s.y}), fx0 = sys.drift({s.x - e, s.y});
  const Vec2 fy1 = sys.drift({s.x, s.y + e}), fy0 = sys.drift({s.x, s.y - e});
  const Vec2 fpp = sys.drift({s.x + e, s.y + e}), fpm = sys.drift({s.x + e, s.y - e});
  const Vec2 fmp = sys.drift({s.x - e, s.y + e}), fmm = sys.drift({s.x - e, s.y - e});
  const double e2 = e * e;
  const double xx1 = (fx1.x - 2.0 * f.x + fx0.x) / e2;
  const double yy1 = (fy1.x - 2.0 * f.x + fy0.x) / e2;
  const double xy1 = (fpp.x - fpm.x - fmp.x + fmm.x) / (4.0 * e2);
  const double xx2 = (fx1.y - 2.0 * f.y + fx0.y) / e2;
  const double yy2 = (fy1.y - 2.0 * f.y + fy0.y) / e2;
  const double xy2 = (fpp.y - fpm.y - fmp.y + fmm.y) / (4.0 * e2);
  return {Mat2{xx1, xy1, xy1, yy1}, Mat2{xx2, xy2, xy2, yy2}};
}

}  // namespace

Vec2 step_euler(const SdeSystem& sys, const Vec2& s, double h, double g1, double g2) {
  const Vec2 f = sys.drift(s);
  const Vec2 g = sys.vol(s);
  return {s.x + f.x * h + g.x * g1, s.y + f.y * h + g.y * g2};
}

// Component-wise refinement: each coordinate is corrected with its own
// derivatives only.  Second derivatives of the affine volatility vanish.
Vec2 step_euler2(const SdeSystem& sys, const Vec2& s, double h, double g1, double g2) {
  const Vec2 f = sys.drift(s);
  const Vec2 g = sys.vol(s);
  const Mat2 J = jacobian_of(sys, s);
  const std::array<Mat2, 2> H = hessians_of(sys, s);
  const double d1 = sys.vol_slopes.a11, d2 = sys.vol_slopes.a22;

  const double x = s.x + f.x * h + g.x * g1 + 0.5 * g.x * d1 * (g1 * g1 - h) +
                   0.5 * h * h * (f.x * J.a11 + 0.5 * g.x * g.x * H[0].a11) +
                   0.5 * h * g1 * (g.x * J.a11 + f.x * d1);
  const double y = s.y + f.y * h + g.y * g2 + 0.5 * g.y * d2 * (g2 * g2 - h) +
                   0.5 * h * h * (f.y * J.a22 + 0.5 * g.y * g.y * H[1].a22) +
                   0.5 * h * g2 * (g.y * J.a22 + f.y * d2);
  return {x, y};
}

// Full weak second-order step with the cross-derivative corrections.
Vec2 step_euler2_cross(const SdeSystem& sys, const Vec2& s, double h, double g1, double g2) {
  const Vec2 f = sys.drift(s);
  const Vec2 g = sys.vol(s);
  const Mat2 J = jacobian_of(sys, s);
  const std::array<Mat2, 2> H = hessians_of(sys, s);
  const Vec2 Jf = J * f;

  if (sys.form == NoiseForm::OneWiener) {
    const Mat2& B = sys.vol_slopes;
    const double G = g1;
    const Vec2 Bg = B * g;
    const Vec2 Jg = J * g;
    const Vec2 Bf = B * f;
    const double quad1 =
        g.x * (H[0].a11 * g.x + H[0].a12 * g.y) + g.y * (H[0].a21 * g.x + H[0].a22 * g.y);
    const double quad2 =
        g.x * (H[1].a11 * g.x + H[1].a12 * g.y) + g.y * (H[1].a21 * g.x + H[1].a22 * g.y);
    const double half_gg = 0.5 * (G * G - h);
    const double half_hg = 0.5 * h * G;
    const double half_hh = 0.5 * h * h;
    return {s.x + f.x * h + g.x * G + Bg.x * half_gg + half_hh * (Jf.x + 0.5 * quad1) +
                half_hg * (Jg.x + Bf.x),
            s.y + f.y * h + g.y * G + Bg.y * half_gg + half_hh * (Jf.y + 0.5 * quad2) +
                half_hg * (Jg.y + Bf.y)};
  }

  // Two independent channels, one per volatility row.  Each channel's vector
  // field has a single nonzero component, so the channel quadratics reduce to
  // the Hessian diagonals, and the mixed iterated integral is replaced by its
  // weak substitute G1 G2 / 2.
  const Mat2& B = sys.vol_slopes;
  const double quad1 = H[0].a11 * g.x * g.x + H[0].a22 * g.y * g.y;
  const double quad2 = H[1].a11 * g.x * g.x + H[1].a22 * g.y * g.y;
  const double x = s.x + f.x * h + g.x * g1 + 0.5 * B.a11 * g.x * (g1 * g1 - h) +
                   0.5 * B.a12 * g.y * g1 * g2 + 0.5 * h * h * (Jf.x + 0.5 * quad1) +
                   0.5 * h *
                       (J.a11 * g.x * g1 + J.a12 * g.y * g2 + (B.a11 * f.x + B.a12 * f.y) * g1);
  const double y = s.y + f.y * h + g.y * g2 + 0.5 * B.a22 * g.y * (g2 * g2 - h) +
                   0.5 * B.a21 * g.x * g1 * g2 + 0.5 * h * h * (Jf.y + 0.5 * quad2) +
                   0.5 * h *
                       (J.a21 * g.x * g1 + J.a22 * g.y * g2 + (B.a21 * f.x + B.a22 * f.y) * g2);
  return {x, y};
}

Trajectory simulate(const SdeSystem& sys, const SimConfig& cfg, std::uint64_t seed) {
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h))
    throw ParameterError("simulate: step size must be positive and finite");
  if (cfg.steps < 1) throw ParameterError("simulate: step count must be at least 1");
  if (!cfg.initial.finite()) throw ParameterError("simulate: initial state is not finite");

  Trajectory traj;
  traj.seed = seed;
  traj.scheme = cfg.scheme;
  traj.times.reserve(cfg.steps + 1);
  traj.states.reserve(cfg.steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(cfg.initial);

  RngState rng(seed);
  const double sqrt_h = std::sqrt(cfg.h);
  Vec2 s = cfg.initial;
  for (std::size_t i = 0; i < cfg.steps; ++i) {
    const auto [z1, z2] = gauss_pair(rng);
    // One shared Wiener channel feeds both slots; two channels use the pair.
    const double g1 = z1 * sqrt_h;
    const double g2 = (sys.form == NoiseForm::OneWiener) ? g1 : z2 * sqrt_h;
    Vec2 next;
    switch (cfg.scheme) {
      case Scheme::Euler: next = step_euler(sys, s, cfg.h, g1, g2); break;
      case Scheme::Euler2: next = step_euler2(sys, s, cfg.h, g1, g2); break;
      case Scheme::Euler2Cross: next = step_euler2_cross(sys, s, cfg.h, g1, g2); break;
    }
    if (!next.finite() || next.norm() > 1e12) {
      traj.blew_up = true;
      traj.blowup_index = i + 1;
      break;
    }
    s = next;
    traj.times.push_back(cfg.h * static_cast<double>(i + 1));
    traj.states.push_back(s);
  }
  return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "n,t,x,y\n";
  char buf[128];
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, traj.times[i],
                  traj.states[i].x, traj.states[i].y);
    out << buf;
  }
}

}  // namespace tumor_sde

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tumor_sde/linalg.hpp"
#include "tumor_sde/linearize.hpp"
#include "tumor_sde/models.hpp"

namespace tumor_sde {

// splitmix64 with uniforms mapped into (0, 1] so log(u) stays finite.
struct RngState {
  std::uint64_t state;

  explicit RngState(std::uint64_t seed) : state(seed) {}
  std::uint64_t next_u64();
  double uniform();
};

inline constexpr const char* kGeneratorName = "splitmix64";

// Box-Muller transform; u1 = 1 maps to the exact pair (0, 0).
std::pair<double, double> gauss_from_uniforms(double u1, double u2);
std::pair<double, double> gauss_pair(RngState& rng);

enum class Scheme { Euler, Euler2, Euler2Cross };

const char* to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct SimConfig {
  double h = 0.01;
  std::size_t steps = 5000;
  Vec2 initial{0.0, 0.0};
  Scheme scheme = Scheme::Euler;
};

// Drift plus affine volatility with a declared Wiener-channel structure.
// The same wrapper covers a nonlinear model with anchored noise and the
// linearized system (slopes = B, offset = 0).
struct SdeSystem {
  std::function<Vec2(const Vec2&)> drift;
  std::function<Mat2(const Vec2&)> drift_jacobian;
  std::function<std::array<Mat2, 2>(const Vec2&)> drift_hessians;  // empty -> finite differences
  Mat2 vol_slopes;
  Vec2 vol_offset{0.0, 0.0};
  NoiseForm form = NoiseForm::OneWiener;

  Vec2 vol(const Vec2& s) const {
    return {vol_slopes.a11 * s.x + vol_slopes.a12 * s.y + vol_offset.x,
            vol_slopes.a21 * s.x + vol_slopes.a22 * s.y + vol_offset.y};
  }
};

SdeSystem make_system(const ModelDefinition& model, const NoiseSpec& noise);
SdeSystem make_system(const ModelDefinition& model, const Equilibrium& anchor,
                      const DiagonalNoiseSpec& noise);
SdeSystem make_system(const LinearSDE& sys);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec2> states;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::Euler;
  std::string generator = kGeneratorName;
  bool blew_up = false;
  std::size_t blowup_index = 0;
};

// One-Wiener systems receive the same increment in both slots.
Vec2 step_euler(const SdeSystem& sys, const Vec2& s, double h, double g1, double g2);
Vec2 step_euler2(const SdeSystem& sys, const Vec2& s, double h, double g1, double g2);
Vec2 step_euler2_cross(const SdeSystem& sys, const Vec2& s, double h, double g1, double g2);

Trajectory simulate(const SdeSystem& sys, const SimConfig& cfg, std::uint64_t seed);

// Header n,t,x,y; 17 significant digits per value.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace tumor_sde

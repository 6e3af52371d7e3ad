#pragma once

#include "tumor_sde/linalg.hpp"
#include "tumor_sde/models.hpp"

namespace tumor_sde {

enum class NoiseForm { OneWiener, TwoWiener };

// Affine volatility pair g_i(x, y) = b_i1 x + b_i2 y + c_i with the constant
// part induced by the anchor, c_i = -b_i1 x_e - b_i2 y_e.  Both components are
// driven by one shared Wiener process.  The offsets reuse the anchor products,
// so g(anchor) evaluates to exactly (0, 0).
struct NoiseSpec {
  Mat2 slopes;
  Vec2 anchor;
  Vec2 offset;

  Vec2 operator()(const Vec2& s) const {
    return {slopes.a11 * s.x + slopes.a12 * s.y + offset.x,
            slopes.a21 * s.x + slopes.a22 * s.y + offset.y};
  }
};

NoiseSpec make_volatility(const Mat2& slopes, const Equilibrium& anchor);

// Component-wise volatility sigma_i * (u_i - anchor_i) with independent
// Wiener processes per component.
struct DiagonalNoiseSpec {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

struct LinearSDE {
  Mat2 A;
  Mat2 B;
  NoiseForm form = NoiseForm::OneWiener;
};

// du = A u dt + B u dW around the anchor equilibrium, u = s - anchor.
LinearSDE linearize_at(const ModelDefinition& model, const Equilibrium& anchor,
                       const Mat2& noise_slopes);
LinearSDE make_diagonal_system(const ModelDefinition& model, const Equilibrium& anchor,
                               const DiagonalNoiseSpec& noise);

// Closed-form drift matrix at the interior equilibrium of the "bell" model,
// expressed directly in the model parameters.
Mat2 bell_p2_linear_matrix(const ModelParameters& p);

}  // namespace tumor_sde

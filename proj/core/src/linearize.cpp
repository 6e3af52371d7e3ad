#include "tumor_sde/linearize.hpp"

#include <cmath>

#include "tumor_sde/errors.hpp"

namespace tumor_sde {

NoiseSpec make_volatility(const Mat2& slopes, const Equilibrium& anchor) {
  NoiseSpec spec;
  spec.slopes = slopes;
  spec.anchor = anchor.state;
  // Stored as the negated products of each slope row with the anchor, so that
  // evaluating at the anchor reproduces the identical products and cancels
  // to exactly zero in floating point.
  spec.offset = {-(slopes.a11 * anchor.state.x) - (slopes.a12 * anchor.state.y),
                 -(slopes.a21 * anchor.state.x) - (slopes.a22 * anchor.state.y)};
  return spec;
}

LinearSDE linearize_at(const ModelDefinition& model, const Equilibrium& anchor,
                       const Mat2& noise_slopes) {
  if (!anchor.state.finite()) throw ParameterError("linearize_at: anchor is not finite");
  if (!(anchor.residual <= 1e-9))
    throw ParameterError("linearize_at: anchor residual exceeds 1e-9; refine it first");
  LinearSDE sys;
  sys.A = model.jacobian(anchor.state);
  sys.B = noise_slopes;
  sys.form = NoiseForm::OneWiener;
  if (!sys.A.finite()) throw NumericError("linearize_at: Jacobian is not finite at anchor");
  return sys;
}

LinearSDE make_diagonal_system(const ModelDefinition& model, const Equilibrium& anchor,
                               const DiagonalNoiseSpec& noise) {
  if (!anchor.state.finite())
    throw ParameterError("make_diagonal_system: anchor is not finite");
  if (!(anchor.residual <= 1e-9))
    throw ParameterError("make_diagonal_system: anchor residual exceeds 1e-9; refine it first");
  if (noise.sigma1 < 0.0 || noise.sigma2 < 0.0)
    throw ParameterError("make_diagonal_system: noise intensities must be nonnegative");
  LinearSDE sys;
  sys.A = model.jacobian(anchor.state);
  sys.B = Mat2::diagonal(noise.sigma1, noise.sigma2);
  sys.form = NoiseForm::TwoWiener;
  if (!sys.A.finite())
    throw NumericError("make_diagonal_system: Jacobian is not finite at anchor");
  return sys;
}

Mat2 bell_p2_linear_matrix(const ModelParameters& p) {
  const double a1 = p.at("a1"), a2 = p.at("a2");
  const double b1 = p.at("b1"), b2 = p.at("b2"), b3 = p.at("b3"), b4 = p.at("b4");
  const double denom = a1 * b1 - a2 * b2;
  if (denom == 0.0)
    throw ParameterError("bell_p2_linear_matrix: degenerate parameters, a1*b1 - a2*b2 = 0");
  return {0.0, -a2 * (a1 * b3 - a2 * b4) / denom, denom / a2,
          a2 * (b2 * b3 - b1 * b4) / denom};
}

}  // namespace tumor_sde

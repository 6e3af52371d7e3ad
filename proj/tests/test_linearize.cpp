#include <doctest.h>

#include <tumor_sde/errors.hpp>
#include <tumor_sde/linearize.hpp>
#include <tumor_sde/models.hpp>

#include <cmath>

using namespace tumor_sde;

namespace {

Equilibrium interior(const ModelDefinition& model) {
  for (const auto& e : find_equilibria(model))
    if (e.label == EquilibriumLabel::P2) return e;
  REQUIRE(false);
  return {};
}

}  // namespace

TEST_CASE("anchored volatility vanishes bitwise at the anchor") {
  auto model = make_model("kuznetsov-taylor");
  auto p2 = interior(model);
  // Slope entries with no nice binary representation; the offset must still
  // cancel the anchor contribution exactly because it is built from the same
  // products.
  NoiseSpec noise = make_volatility(Mat2{0.1, -0.7, 1.9, 3.3}, p2);
  Vec2 g = noise(p2.state);
  CHECK(g.x == 0.0);
  CHECK(g.y == 0.0);

  // And the offset is literally the negated anchor products.
  CHECK(noise.offset.x == -(0.1 * p2.state.x) - (-0.7 * p2.state.y));
  CHECK(noise.offset.y == -(1.9 * p2.state.x) - (3.3 * p2.state.y));
}

TEST_CASE("linearize_at pairs the drift jacobian with the slope matrix") {
  auto model = make_model("bell");
  auto p2 = interior(model);
  Mat2 slopes{3.0, 2.0, -2.0, 3.0};
  auto sys = linearize_at(model, p2, slopes);
  CHECK(sys.form == NoiseForm::OneWiener);
  CHECK(sys.B.a11 == 3.0);
  CHECK(sys.B.a12 == 2.0);
  CHECK(sys.B.a21 == -2.0);
  CHECK(sys.B.a22 == 3.0);
  CHECK(sys.A.a11 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(sys.A.a12 == doctest::Approx(-5.0 / 28.0).epsilon(1e-12));
  CHECK(sys.A.a21 == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(sys.A.a22 == doctest::Approx(-27.0 / 35.0).epsilon(1e-12));
}

TEST_CASE("linearize_at rejects unconverged anchors") {
  auto model = make_model("bell");
  Equilibrium sloppy;
  sloppy.state = Vec2{0.2, 2.4};
  sloppy.residual = 1e-3;
  CHECK_THROWS_AS(linearize_at(model, sloppy, Mat2::identity()), ParameterError);
}

TEST_CASE("interior bell matrix closed form agrees with the jacobian") {
  auto model = make_model("bell");
  auto p2 = interior(model);
  Mat2 closed = bell_p2_linear_matrix(model.params);
  Mat2 direct = jacobian_at(model, p2.state);
  CHECK(closed.a11 == doctest::Approx(direct.a11).epsilon(1e-13));
  CHECK(closed.a12 == doctest::Approx(direct.a12).epsilon(1e-13));
  CHECK(closed.a21 == doctest::Approx(direct.a21).epsilon(1e-13));
  CHECK(closed.a22 == doctest::Approx(direct.a22).epsilon(1e-13));
  CHECK(closed.a22 == doctest::Approx(-27.0 / 35.0).epsilon(1e-13));
}

TEST_CASE("diagonal sigma systems carry two Wiener channels") {
  auto model = make_model("bell");
  auto p2 = interior(model);
  auto sys = make_diagonal_system(model, p2, DiagonalNoiseSpec{0.1, 0.2});
  CHECK(sys.form == NoiseForm::TwoWiener);
  CHECK(sys.B.a11 == 0.1);
  CHECK(sys.B.a22 == 0.2);
  CHECK(sys.B.a12 == 0.0);
  CHECK(sys.B.a21 == 0.0);

  CHECK_THROWS_AS(make_diagonal_system(model, p2, DiagonalNoiseSpec{-0.1, 0.2}),
                  ParameterError);
}

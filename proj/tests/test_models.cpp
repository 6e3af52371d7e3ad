#include <doctest.h>

#include <tumor_sde/models.hpp>
#include <tumor_sde/errors.hpp>
#include <tumor_sde/simulate.hpp>

#include <algorithm>
#include <cmath>
#include <map>

using namespace tumor_sde;

namespace {

const Equilibrium* by_label(const std::vector<Equilibrium>& eqs, EquilibriumLabel label) {
  for (const auto& e : eqs)
    if (e.label == label) return &e;
  return nullptr;
}

}  // namespace

TEST_CASE("kuznetsov-taylor equilibria closed forms") {
  auto model = make_model("kuznetsov-taylor");
  auto eqs = find_equilibria(model);
  auto* p1 = by_label(eqs, EquilibriumLabel::P1);
  auto* p2 = by_label(eqs, EquilibriumLabel::P2);
  REQUIRE(p1 != nullptr);
  REQUIRE(p2 != nullptr);

  // P1 = (a1/a2, 0)
  CHECK(p1->state.x == doctest::Approx(0.1181 / 0.3747).epsilon(1e-14));
  CHECK(p1->state.y == 0.0);
  CHECK(p1->residual <= 1e-9);

  // Interior point from the quadratic in x; both coordinates positive.
  CHECK(p2->state.x == doctest::Approx(1.5534604346668).epsilon(1e-10));
  CHECK(p2->state.y == doctest::Approx(25.226028523924).epsilon(1e-10));
  CHECK(p2->residual <= 1e-9);

  // The closed form satisfies the drift identically, not just approximately.
  auto f = model.drift(p2->state);
  CHECK(std::hypot(f.x, f.y) <= 1e-12);
}

TEST_CASE("bell equilibria closed forms") {
  auto model = make_model("bell");
  auto eqs = find_equilibria(model);
  auto* p1 = by_label(eqs, EquilibriumLabel::P1);
  auto* p2 = by_label(eqs, EquilibriumLabel::P2);
  REQUIRE(p1 != nullptr);
  REQUIRE(p2 != nullptr);

  CHECK(p1->state.x == 0.0);
  CHECK(p1->state.y == doctest::Approx(2.0 / 0.95).epsilon(1e-14));
  CHECK(p2->state.x == doctest::Approx(5.0 / 28.0).epsilon(1e-13));
  CHECK(p2->state.y == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(p1->residual <= 1e-9);
  CHECK(p2->residual <= 1e-9);
}

TEST_CASE("jacobians at the reference equilibria") {
  auto kt = make_model("kuznetsov-taylor");
  auto bell = make_model("bell");
  auto kt_eqs = find_equilibria(kt);
  auto bell_eqs = find_equilibria(bell);

  Mat2 j1 = jacobian_at(kt, by_label(kt_eqs, EquilibriumLabel::P1)->state);
  CHECK(j1.a11 == doctest::Approx(-0.3747).epsilon(1e-12));
  CHECK(j1.a12 == doctest::Approx(0.0037317961).epsilon(1e-8));
  CHECK(j1.a21 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(j1.a22 == doctest::Approx(1.3208145183).epsilon(1e-8));

  Mat2 j2 = jacobian_at(kt, by_label(kt_eqs, EquilibriumLabel::P2)->state);
  CHECK(j2.a11 == doctest::Approx(-0.0760238223).epsilon(1e-8));
  CHECK(j2.a12 == doctest::Approx(0.0183929715).epsilon(1e-8));
  CHECK(j2.a21 == doctest::Approx(-25.2260285239).epsilon(1e-8));
  CHECK(j2.a22 == doctest::Approx(-0.0825395653).epsilon(1e-8));

  Mat2 b1 = jacobian_at(bell, by_label(bell_eqs, EquilibriumLabel::P1)->state);
  CHECK(b1.a11 == doctest::Approx(2.5 - 2.0 / 0.95).epsilon(1e-12));
  CHECK(b1.a12 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(b1.a21 == doctest::Approx(2.0 / 0.95 - 0.4).epsilon(1e-12));
  CHECK(b1.a22 == doctest::Approx(-0.95).epsilon(1e-12));

  Mat2 b2 = jacobian_at(bell, by_label(bell_eqs, EquilibriumLabel::P2)->state);
  CHECK(b2.a11 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(b2.a12 == doctest::Approx(-5.0 / 28.0).epsilon(1e-12));
  CHECK(b2.a21 == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(b2.a22 == doctest::Approx(-27.0 / 35.0).epsilon(1e-12));
}

TEST_CASE("analytic jacobian matches central finite differences") {
  RngState rng{20260816u};
  for (const auto& name : registered_models()) {
    auto model = make_model(name);
    for (int k = 0; k < 100; ++k) {
      // Keep states positive and away from the axes: the growth-law variants
      // contain log(K/x) and 1/x terms.
      Vec2 s{0.2 + 4.0 * rng.uniform(), 0.2 + 4.0 * rng.uniform()};
      Mat2 a = model.jacobian(s);
      const double e = 1e-6;
      auto fxp = model.drift({s.x + e, s.y});
      auto fxm = model.drift({s.x - e, s.y});
      auto fyp = model.drift({s.x, s.y + e});
      auto fym = model.drift({s.x, s.y - e});
      Mat2 fd{(fxp.x - fxm.x) / (2 * e), (fyp.x - fym.x) / (2 * e),
              (fxp.y - fxm.y) / (2 * e), (fyp.y - fym.y) / (2 * e)};
      double scale = 1.0 + std::fabs(a.a11) + std::fabs(a.a12) + std::fabs(a.a21) +
                     std::fabs(a.a22);
      CHECK(std::fabs(a.a11 - fd.a11) / scale <= 1e-6);
      CHECK(std::fabs(a.a12 - fd.a12) / scale <= 1e-6);
      CHECK(std::fabs(a.a21 - fd.a21) / scale <= 1e-6);
      CHECK(std::fabs(a.a22 - fd.a22) / scale <= 1e-6);
    }
  }
}

TEST_CASE("kuznetsov-taylor without the interior coupling has only P1") {
  auto model = make_model("kuznetsov-taylor", {{"a3", 0.0}});
  auto eqs = find_equilibria(model);
  CHECK(by_label(eqs, EquilibriumLabel::P1) != nullptr);
  CHECK(by_label(eqs, EquilibriumLabel::P2) == nullptr);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(make_model("no-such-model"), ParameterError);
  CHECK_THROWS_AS(make_model("kuznetsov-taylor", {{"zz", 1.0}}), ParameterError);
  CHECK_THROWS_AS(make_model("kuznetsov-taylor", {{"a2", 0.0}}), ParameterError);
  CHECK_THROWS_AS(make_model("kuznetsov-taylor", {{"a3", -1.0}}), ParameterError);
  // Degenerate bell denominator a1*b1 - a2*b2 = 0.
  CHECK_THROWS_AS(make_model("bell", {{"a1", 0.4}, {"b1", 1.0}, {"a2", 1.0}, {"b2", 0.4}}),
                  ParameterError);
  CHECK_THROWS_AS(make_model("vladar-gonzalez", {{"K", 0.0}}), ParameterError);
}

TEST_CASE("registry lists the seven models") {
  auto names = registered_models();
  for (const char* want : {"kuznetsov-taylor", "bell", "volterra", "stepanova",
                           "vladar-gonzalez", "exponential", "logistic"}) {
    CHECK(std::find(names.begin(), names.end(), want) != names.end());
  }
  CHECK_FALSE(make_model("kuznetsov-taylor").experimental);
  CHECK_FALSE(make_model("bell").experimental);
  CHECK(make_model("volterra").experimental);
}

TEST_CASE("experimental models produce refined equilibria") {
  for (const char* name : {"volterra", "stepanova", "vladar-gonzalez", "exponential",
                           "logistic"}) {
    auto model = make_model(name);
    auto eqs = find_equilibria(model);
    INFO("model ", name);
    CHECK(!eqs.empty());
    for (const auto& e : eqs) {
      CHECK(e.residual <= 1e-9);
      CHECK(e.label == EquilibriumLabel::Numeric);
      auto f = model.drift(e.state);
      CHECK(std::hypot(f.x, f.y) <= 1e-9);
    }
  }
}

TEST_CASE("newton refinement recovers a perturbed equilibrium") {
  auto model = make_model("kuznetsov-taylor");
  auto eqs = find_equilibria(model);
  auto* p2 = by_label(eqs, EquilibriumLabel::P2);
  REQUIRE(p2 != nullptr);
  Vec2 s{p2->state.x + 1e-3, p2->state.y - 1e-3};
  CHECK(refine_equilibrium(model, s));
  CHECK(std::fabs(s.x - p2->state.x) <= 1e-9);
  CHECK(std::fabs(s.y - p2->state.y) <= 1e-9);
}

TEST_CASE("equilibrium labels print") {
  CHECK(std::string(to_string(EquilibriumLabel::P1)) == "P1");
  CHECK(std::string(to_string(EquilibriumLabel::P2)) == "P2");
  CHECK(std::string(to_string(EquilibriumLabel::Numeric)) == "numeric");
}

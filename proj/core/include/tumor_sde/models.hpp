#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tumor_sde/linalg.hpp"

namespace tumor_sde {

struct ModelParameters {
  std::map<std::string, double> values;

  double at(const std::string& name) const;
  bool has(const std::string& name) const { return values.count(name) != 0; }
};

enum class EquilibriumLabel { P1, P2, Numeric };
enum class EquilibriumMethod { ClosedForm, Refined };

struct Equilibrium {
  Vec2 state;
  double residual = 0.0;
  EquilibriumLabel label = EquilibriumLabel::Numeric;
  EquilibriumMethod method = EquilibriumMethod::Refined;
};

const char* to_string(EquilibriumLabel label);

struct ModelDefinition {
  std::string name;
  ModelParameters params;
  std::function<Vec2(const Vec2&)> drift;
  std::function<Mat2(const Vec2&)> jacobian;
  // hessians(s)[k] holds the second partials of drift component k.
  std::function<std::array<Mat2, 2>(const Vec2&)> hessians;
  // Registry entries outside the two fully supported models carry closed-form
  // equilibria for nothing and are searched numerically instead.
  bool experimental = false;
};

std::vector<std::string> registered_models();
ModelDefinition make_model(const std::string& name);
ModelDefinition make_model(const std::string& name, const std::map<std::string, double>& overrides);

Mat2 jacobian_at(const ModelDefinition& model, const Vec2& state);
std::vector<Equilibrium> find_equilibria(const ModelDefinition& model);

// Damped Newton polish of an approximate root of the drift field.
// Returns true when it converged (|step| < 1e-12 within max_iter iterations).
bool refine_equilibrium(const ModelDefinition& model, Vec2& state, int max_iter = 50);

}  // namespace tumor_sde

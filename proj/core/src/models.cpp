#include "tumor_sde/models.hpp"

#include <algorithm>
#include <cmath>

#include "tumor_sde/errors.hpp"

namespace tumor_sde {

double ModelParameters::at(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw ParameterError("unknown model parameter '" + name + "'");
  return it->second;
}

const char* to_string(EquilibriumLabel label) {
  switch (label) {
    case EquilibriumLabel::P1: return "P1";
    case EquilibriumLabel::P2: return "P2";
    case EquilibriumLabel::Numeric: return "numeric";
  }
  return "?";
}

namespace {

struct Registered {
  const char* name;
  std::map<std::string, double> defaults;
  bool experimental;
};

const std::vector<Registered>& registry() {
  static const std::vector<Registered> entries = {
      {"kuznetsov-taylor",
       {{"a1", 0.1181}, {"a2", 0.3747}, {"a3", 0.01184}, {"b1", 1.636}, {"b2", 0.002}},
       false},
      {"bell",
       {{"a1", 2.5}, {"a2", 1.0}, {"b1", 1.0}, {"b2", 0.4}, {"b3", 0.95}, {"b4", 2.0}},
       false},
      {"volterra",
       {{"a1", 1.0}, {"a2", 1.0}, {"b1", 0.2}, {"b2", 1.0}, {"b3", 1.0}},
       true},
      {"stepanova",
       {{"a1", 1.0}, {"b", 0.5}, {"b1", 1.0}, {"b2", 0.3}, {"b4", 0.2}},
       true},
      {"vladar-gonzalez",
       {{"K", 10.0}, {"b1", 1.0}, {"b2", 0.5}, {"b3", 0.05}},
       true},
      {"exponential",
       {{"b1", 1.0}, {"b2", 0.5}, {"b3", 0.05}},
       true},
      {"logistic",
       {{"a1", 0.5}, {"b1", 1.0}, {"b2", 0.5}, {"b3", 0.05}},
       true},
  };
  return entries;
}

void require_finite(const ModelParameters& p, const std::string& model) {
  for (const auto& [key, value] : p.values) {
    if (!std::isfinite(value))
      throw ParameterError(model + ": parameter '" + key + "' is not finite");
  }
}

void require_positive(const ModelParameters& p, const std::string& model, const char* key) {
  if (!(p.at(key) > 0.0))
    throw ParameterError(model + ": parameter '" + std::string(key) + "' must be positive");
}

void validate(const std::string& name, const ModelParameters& p) {
  require_finite(p, name);
  if (name == "kuznetsov-taylor") {
    require_positive(p, name, "a2");
    require_positive(p, name, "b1");
    require_positive(p, name, "b2");
    if (p.at("a1") < 0.0) throw ParameterError(name + ": parameter 'a1' must be nonnegative");
    if (p.at("a3") < 0.0) throw ParameterError(name + ": parameter 'a3' must be nonnegative");
  } else if (name == "bell") {
    require_positive(p, name, "a2");
    require_positive(p, name, "b3");
    if (p.at("a1") * p.at("b1") - p.at("a2") * p.at("b2") == 0.0)
      throw ParameterError(name + ": degenerate parameters, a1*b1 - a2*b2 = 0");
  } else if (name == "vladar-gonzalez") {
    require_positive(p, name, "K");
  }
}

ModelDefinition build_kuznetsov_taylor(ModelParameters p) {
  const double a1 = p.at("a1"), a2 = p.at("a2"), a3 = p.at("a3");
  const double b1 = p.at("b1"), b2 = p.at("b2");
  ModelDefinition m;
  m.name = "kuznetsov-taylor";
  m.params = std::move(p);
  m.drift = [=](const Vec2& s) -> Vec2 {
    return {a1 - a2 * s.x + a3 * s.x * s.y, b1 * s.y * (1.0 - b2 * s.y) - s.x * s.y};
  };
  m.jacobian = [=](const Vec2& s) -> Mat2 {
    return {-a2 + a3 * s.y, a3 * s.x, -s.y, b1 - 2.0 * b1 * b2 * s.y - s.x};
  };
  m.hessians = [=](const Vec2&) -> std::array<Mat2, 2> {
    return {Mat2{0.0, a3, a3, 0.0}, Mat2{0.0, -1.0, -1.0, -2.0 * b1 * b2}};
  };
  return m;
}

ModelDefinition build_bell(ModelParameters p) {
  const double a1 = p.at("a1"), a2 = p.at("a2");
  const double b1 = p.at("b1"), b2 = p.at("b2"), b3 = p.at("b3"), b4 = p.at("b4");
  ModelDefinition m;
  m.name = "bell";
  m.params = std::move(p);
  m.drift = [=](const Vec2& s) -> Vec2 {
    return {s.x * (a1 - a2 * s.y), (b1 * s.x - b3) * s.y - b2 * s.x + b4};
  };
  m.jacobian = [=](const Vec2& s) -> Mat2 {
    return {a1 - a2 * s.y, -a2 * s.x, b1 * s.y - b2, b1 * s.x - b3};
  };
  m.hessians = [=](const Vec2&) -> std::array<Mat2, 2> {
    return {Mat2{0.0, -a2, -a2, 0.0}, Mat2{0.0, b1, b1, 0.0}};
  };
  return m;
}

ModelDefinition build_volterra(ModelParameters p) {
  const double a1 = p.at("a1"), a2 = p.at("a2");
  const double b1 = p.at("b1"), b2 = p.at("b2"), b3 = p.at("b3");
  ModelDefinition m;
  m.name = "volterra";
  m.params = std::move(p);
  m.experimental = true;
  m.drift = [=](const Vec2& s) -> Vec2 {
    return {s.x * (a1 - a2 * s.x * s.y), (b3 * s.x - b2) * s.y - b1 * s.x};
  };
  m.jacobian = [=](const Vec2& s) -> Mat2 {
    return {a1 - 2.0 * a2 * s.x * s.y, -a2 * s.x * s.x, b3 * s.y - b1, b3 * s.x - b2};
  };
  m.hessians = [=](const Vec2& s) -> std::array<Mat2, 2> {
    return {Mat2{-2.0 * a2 * s.y, -2.0 * a2 * s.x, -2.0 * a2 * s.x, 0.0},
            Mat2{0.0, b3, b3, 0.0}};
  };
  return m;
}

ModelDefinition build_stepanova(ModelParameters p) {
  const double a1 = p.at("a1"), b = p.at("b");
  const double b1 = p.at("b1"), b2 = p.at("b2"), b4 = p.at("b4");
  ModelDefinition m;
  m.name = "stepanova";
  m.params = std::move(p);
  m.experimental = true;
  m.drift = [=](const Vec2& s) -> Vec2 {
    return {s.x * (a1 - s.y), (b1 * s.x - b) * s.y - b2 * s.x + b4};
  };
  m.jacobian = [=](const Vec2& s) -> Mat2 {
    return {a1 - s.y, -s.x, b1 * s.y - b2, b1 * s.x - b};
  };
  m.hessians = [=](const Vec2&) -> std::array<Mat2, 2> {
    return {Mat2{0.0, -1.0, -1.0, 0.0}, Mat2{0.0, b1, b1, 0.0}};
  };
  return m;
}

// The last three variants share the immune equation (b1 x - b2 - b3 x^2) y + 1.
ModelDefinition build_growth_law(const char* name, ModelParameters p,
                                 std::function<double(double)> growth,
                                 std::function<double(double)> growth_dx,
                                 std::function<double(double)> growth_dxx) {
  const double b1 = p.at("b1"), b2 = p.at("b2"), b3 = p.at("b3");
  ModelDefinition m;
  m.name = name;
  m.params = std::move(p);
  m.experimental = true;
  m.drift = [=](const Vec2& s) -> Vec2 {
    return {s.x * (growth(s.x) - s.y), (b1 * s.x - b2 - b3 * s.x * s.x) * s.y + 1.0};
  };
  m.jacobian = [=](const Vec2& s) -> Mat2 {
    return {growth(s.x) + s.x * growth_dx(s.x) - s.y, -s.x, (b1 - 2.0 * b3 * s.x) * s.y,
            b1 * s.x - b2 - b3 * s.x * s.x};
  };
  m.hessians = [=](const Vec2& s) -> std::array<Mat2, 2> {
    const double f1_xx = 2.0 * growth_dx(s.x) + s.x * growth_dxx(s.x);
    return {Mat2{f1_xx, -1.0, -1.0, 0.0},
            Mat2{-2.0 * b3 * s.y, b1 - 2.0 * b3 * s.x, b1 - 2.0 * b3 * s.x, 0.0}};
  };
  return m;
}

ModelDefinition build_variant(const std::string& name, ModelParameters p) {
  if (name == "volterra") return build_volterra(std::move(p));
  if (name == "stepanova") return build_stepanova(std::move(p));
  if (name == "vladar-gonzalez") {
    const double K = p.at("K");
    return build_growth_law(
        "vladar-gonzalez", std::move(p), [K](double x) { return std::log(K / x); },
        [](double x) { return -1.0 / x; }, [](double x) { return 1.0 / (x * x); });
  }
  if (name == "exponential") {
    return build_growth_law(
        "exponential", std::move(p), [](double) { return 1.0; }, [](double) { return 0.0; },
        [](double) { return 0.0; });
  }
  if (name == "logistic") {
    const double a1 = p.at("a1");
    return build_growth_law(
        "logistic", std::move(p), [a1](double x) { return 1.0 - a1 / x; },
        [a1](double x) { return a1 / (x * x); }, [a1](double x) { return -2.0 * a1 / (x * x * x); });
  }
  throw ParameterError("unknown model '" + name + "'");
}

}  // namespace

std::vector<std::string> registered_models() {
  std::vector<std::string> names;
  for (const auto& entry : registry()) names.emplace_back(entry.name);
  return names;
}

ModelDefinition make_model(const std::string& name) { return make_model(name, {}); }

ModelDefinition make_model(const std::string& name,
                           const std::map<std::string, double>& overrides) {
  const Registered* found = nullptr;
  for (const auto& entry : registry()) {
    if (name == entry.name) {
      found = &entry;
      break;
    }
  }
  if (!found) throw ParameterError("unknown model '" + name + "'");

  ModelParameters params{found->defaults};
  for (const auto& [key, value] : overrides) {
    if (!params.has(key))
      throw ParameterError(name + ": unknown parameter override '" + key + "'");
    params.values[key] = value;
  }
  validate(name, params);

  if (name == "kuznetsov-taylor") return build_kuznetsov_taylor(std::move(params));
  if (name == "bell") return build_bell(std::move(params));
  return build_variant(name, std::move(params));
}

Mat2 jacobian_at(const ModelDefinition& model, const Vec2& state) {
  return model.jacobian(state);
}

bool refine_equilibrium(const ModelDefinition& model, Vec2& state, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const Vec2 f = model.drift(state);
    if (!f.finite()) return false;
    Vec2 step;
    if (!solve2(model.jacobian(state), {-f.x, -f.y}, step)) return false;
    const double cap = 0.5 * (1.0 + state.norm());
    if (step.norm() > cap) step = step * (cap / step.norm());
    Vec2 next = state + step;
    for (int halve = 0; halve < 8 && !model.drift(next).finite(); ++halve) {
      step = 0.5 * step;
      next = state + step;
    }
    state = next;
    if (step.norm() < 1e-12) return true;
  }
  return false;
}

namespace {

Equilibrium polished(const ModelDefinition& model, Vec2 closed, EquilibriumLabel label) {
  Vec2 refined = closed;
  refine_equilibrium(model, refined);
  if ((refined - closed).norm() >= 1e-8)
    throw NumericError(model.name + ": closed-form equilibrium " + to_string(label) +
                       " moved more than 1e-8 under Newton refinement");
  Equilibrium eq;
  eq.state = refined;
  eq.residual = model.drift(refined).norm();
  eq.label = label;
  eq.method = EquilibriumMethod::ClosedForm;
  if (eq.residual > 1e-9)
    throw NumericError(model.name + ": equilibrium " + to_string(label) +
                       " residual exceeds 1e-9 after refinement");
  return eq;
}

std::vector<Equilibrium> kuznetsov_taylor_equilibria(const ModelDefinition& model) {
  const auto& p = model.params;
  const double a1 = p.at("a1"), a2 = p.at("a2"), a3 = p.at("a3");
  const double b1 = p.at("b1"), b2 = p.at("b2");

  std::vector<Equilibrium> out;
  out.push_back(polished(model, {a1 / a2, 0.0}, EquilibriumLabel::P1));

  if (a3 > 0.0) {
    const double disc = b1 * b1 * (b2 * a2 - a3) * (b2 * a2 - a3) + 4.0 * b1 * b2 * a1 * a3;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      const double x2 = (b1 * (a3 - b2 * a2) + root) / (2.0 * a3);
      const double y2 = (b1 * (b2 * a2 + a3) - root) / (2.0 * b1 * b2 * a3);
      out.push_back(polished(model, {x2, y2}, EquilibriumLabel::P2));
    }
  }
  return out;
}

std::vector<Equilibrium> bell_equilibria(const ModelDefinition& model) {
  const auto& p = model.params;
  const double a1 = p.at("a1"), a2 = p.at("a2");
  const double b1 = p.at("b1"), b2 = p.at("b2"), b3 = p.at("b3"), b4 = p.at("b4");

  std::vector<Equilibrium> out;
  out.push_back(polished(model, {0.0, b4 / b3}, EquilibriumLabel::P1));
  const double denom = a1 * b1 - a2 * b2;
  out.push_back(polished(model, {(a1 * b3 - a2 * b4) / denom, a1 / a2}, EquilibriumLabel::P2));
  return out;
}

std::vector<Equilibrium> numeric_equilibria(const ModelDefinition& model) {
  std::vector<Equilibrium> out;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      Vec2 state{0.5 + i, 0.5 + j};
      if (!refine_equilibrium(model, state)) continue;
      const double residual = model.drift(state).norm();
      if (!(residual <= 1e-9) || !state.finite()) continue;
      bool duplicate = false;
      for (const auto& eq : out) {
        if ((eq.state - state).norm() < 1e-6) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) continue;
      Equilibrium eq;
      eq.state = state;
      eq.residual = residual;
      eq.label = EquilibriumLabel::Numeric;
      eq.method = EquilibriumMethod::Refined;
      out.push_back(eq);
    }
  }
  std::sort(out.begin(), out.end(), [](const Equilibrium& a, const Equilibrium& b) {
    return a.state.x != b.state.x ? a.state.x < b.state.x : a.state.y < b.state.y;
  });
  return out;
}

}  // namespace

std::vector<Equilibrium> find_equilibria(const ModelDefinition& model) {
  if (model.name == "kuznetsov-taylor") return kuznetsov_taylor_equilibria(model);
  if (model.name == "bell") return bell_equilibria(model);
  return numeric_equilibria(model);
}

}  // namespace tumor_sde

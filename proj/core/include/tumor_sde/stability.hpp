#pragma once

#include <optional>
#include <string>

#include "tumor_sde/linalg.hpp"
#include "tumor_sde/linearize.hpp"
#include "tumor_sde/lyapunov.hpp"
#include "tumor_sde/models.hpp"

namespace tumor_sde {

// V(u) = (w1 u1^2 + w2 u2^2) / 2 with positive weights.
struct QuadraticForm {
  double w1 = 1.0;
  double w2 = 1.0;

  bool positive() const { return w1 > 0.0 && w2 > 0.0; }
  double operator()(const Vec2& u) const { return 0.5 * (w1 * u.x * u.x + w2 * u.y * u.y); }
};

// Generator of the linear SDE applied to V.  V has no mixed second partial,
// so the same expression serves both Wiener-channel layouts:
//   LV = (a11 u1 + a12 u2) w1 u1 + (a21 u1 + a22 u2) w2 u2
//        + ((b11 u1 + b12 u2)^2 w1 + (b21 u1 + b22 u2)^2 w2) / 2.
double apply_lv(const LinearSDE& sys, const QuadraticForm& V, const Vec2& u);

// LV as a quadratic form: {u1^2, u2^2, u1 u2} coefficients.
std::array<double, 3> lv_coefficients(const LinearSDE& sys, const QuadraticForm& V);

// -LV = q1 u1^2 + q2 u2^2 - cross u1 u2; valid certificates have
// q1 > 0, q2 > 0 and |cross| <= 1e-12.
struct Certificate {
  QuadraticForm V;
  double q1 = 0.0;
  double q2 = 0.0;
  double cross = 0.0;
  bool valid = false;
  std::string reason;
};

inline constexpr double kCrossTolerance = 1e-12;

enum class RatioMode {
  CrossCancelling,  // w1 = w2 (b1 y2 - b2) / (x2 a2): kills the mixed term
  AsPrinted         // w1 = w2 (b1 y2 - b2) / (a2 y2): kept for comparison
};

// Diagonal-quadratic certificate at the interior equilibrium of the "bell"
// model under component-wise noise sigma_i (u_i - P2_i).  The diagonal
// entries follow the printed forms
//   q1 = w1 (a2 y2 - a1 - sigma1^2),  q2 = w2 (b3 - b1 y2 - sigma2^2),
// and a2 y2 - a1 vanishes at P2, so q1 = -w1 sigma1^2 <= 0: any sigma1 > 0
// leaves the certificate on the wrong side of its own boundary.  That
// contradiction is reported through `reason`, never silently accepted.
Certificate bell_certificate(const ModelDefinition& bell, double sigma1, double sigma2,
                             double w2 = 1.0, RatioMode mode = RatioMode::CrossCancelling);

enum class StabilityKind { MeanSquareStable, AsymptoticallyStable, Unstable, Inconclusive };

const char* to_string(StabilityKind kind);

struct StabilityVerdict {
  StabilityKind kind = StabilityKind::Inconclusive;
  std::optional<Certificate> certificate;
  std::optional<LyapunovResult> lyapunov;
  std::string note;
};

// Certificate first (given V, or a search over the cross-cancelling weight
// family); otherwise the top Lyapunov exponent decides the sign, with B = 0
// routed to the deterministic eigenvalue.
StabilityVerdict classify(const LinearSDE& sys, std::optional<QuadraticForm> V = {});

std::string stability_report(const StabilityVerdict& verdict);

}  // namespace tumor_sde

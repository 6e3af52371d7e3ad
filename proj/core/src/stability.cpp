#include "tumor_sde/stability.hpp"

#include <cmath>
#include <sstream>

#include "tumor_sde/errors.hpp"

namespace tumor_sde {

double apply_lv(const LinearSDE& sys, const QuadraticForm& V, const Vec2& u) {
  const Mat2& A = sys.A;
  const Mat2& B = sys.B;
  const double g1 = B.a11 * u.x + B.a12 * u.y;
  const double g2 = B.a21 * u.x + B.a22 * u.y;
  return (A.a11 * u.x + A.a12 * u.y) * V.w1 * u.x + (A.a21 * u.x + A.a22 * u.y) * V.w2 * u.y +
         0.5 * (g1 * g1 * V.w1 + g2 * g2 * V.w2);
}

std::array<double, 3> lv_coefficients(const LinearSDE& sys, const QuadraticForm& V) {
  const Mat2& A = sys.A;
  const Mat2& B = sys.B;
  const double c1 = V.w1 * (A.a11 + 0.5 * B.a11 * B.a11) + 0.5 * V.w2 * B.a21 * B.a21;
  const double c2 = V.w2 * (A.a22 + 0.5 * B.a22 * B.a22) + 0.5 * V.w1 * B.a12 * B.a12;
  const double cross = V.w1 * (A.a12 + B.a11 * B.a12) + V.w2 * (A.a21 + B.a21 * B.a22);
  return {c1, c2, cross};
}

namespace {

Certificate certificate_from(const LinearSDE& sys, const QuadraticForm& V) {
  Certificate cert;
  cert.V = V;
  const auto [c1, c2, cross] = lv_coefficients(sys, V);
  cert.q1 = -c1;
  cert.q2 = -c2;
  cert.cross = cross;
  if (!V.positive()) {
    cert.reason = "weights are not positive";
    return cert;
  }
  if (std::fabs(cross) > kCrossTolerance) {
    cert.reason = "mixed term of LV does not cancel";
    return cert;
  }
  if (!(cert.q1 > 0.0) || !(cert.q2 > 0.0)) {
    cert.reason = "-LV is not positive definite";
    return cert;
  }
  cert.valid = true;
  cert.reason = "valid";
  return cert;
}

// Searches the diagonal family for weights that cancel the mixed term and
// leave -LV positive definite.
Certificate certificate_search(const LinearSDE& sys) {
  const Mat2& A = sys.A;
  const Mat2& B = sys.B;
  const double p = A.a12 + B.a11 * B.a12;
  const double q = A.a21 + B.a21 * B.a22;

  if (p == 0.0 && q == 0.0) {
    // The mixed term vanishes for every weight pair; pick a ratio inside the
    // window where both diagonal entries stay positive.
    const double alpha1 = A.a11 + 0.5 * B.a11 * B.a11;
    const double alpha2 = A.a22 + 0.5 * B.a22 * B.a22;
    const double beta1 = 0.5 * B.a21 * B.a21;
    const double beta2 = 0.5 * B.a12 * B.a12;
    Certificate cert;
    if (!(alpha1 < 0.0) || !(alpha2 < 0.0)) {
      cert.reason = "diagonal entries of LV cannot both turn negative";
      return cert;
    }
    const double lower = beta1 / (-alpha1);
    const bool upper_open = beta2 == 0.0;
    const double upper = upper_open ? 0.0 : (-alpha2) / beta2;
    if (!upper_open && upper <= lower) {
      cert.reason = "no positive weight ratio makes -LV positive definite";
      return cert;
    }
    double ratio;
    if (upper_open) {
      ratio = (lower == 0.0) ? 1.0 : 2.0 * lower;
    } else {
      ratio = (lower == 0.0) ? 0.5 * upper : std::sqrt(lower * upper);
    }
    return certificate_from(sys, {ratio, 1.0});
  }

  Certificate cert;
  if (p == 0.0 || q == 0.0) {
    cert.reason = "mixed term of LV cannot cancel with positive weights";
    return cert;
  }
  const double ratio = -q / p;
  if (!(ratio > 0.0)) {
    cert.reason = "cancelling weight ratio is not positive";
    return cert;
  }
  return certificate_from(sys, {ratio, 1.0});
}

}  // namespace

Certificate bell_certificate(const ModelDefinition& bell, double sigma1, double sigma2,
                             double w2, RatioMode mode) {
  if (bell.name != "bell")
    throw ParameterError("bell_certificate: model '" + bell.name + "' is not 'bell'");
  if (sigma1 < 0.0 || sigma2 < 0.0)
    throw ParameterError("bell_certificate: noise intensities must be nonnegative");
  if (!(w2 > 0.0)) throw ParameterError("bell_certificate: w2 must be positive");

  const auto& p = bell.params;
  const double a1 = p.at("a1"), a2 = p.at("a2");
  const double b1 = p.at("b1"), b2 = p.at("b2"), b3 = p.at("b3"), b4 = p.at("b4");
  const double denom = a1 * b1 - a2 * b2;
  const double x2 = (a1 * b3 - a2 * b4) / denom;
  const double y2 = a1 / a2;

  Certificate cert;
  const double w1 = (mode == RatioMode::CrossCancelling)
                        ? w2 * (b1 * y2 - b2) / (x2 * a2)
                        : w2 * (b1 * y2 - b2) / (a2 * y2);
  cert.V = {w1, w2};
  cert.q1 = w1 * (a2 * y2 - a1 - sigma1 * sigma1);
  cert.q2 = w2 * (b3 - b1 * y2 - sigma2 * sigma2);
  cert.cross = w2 * (b1 * y2 - b2) - w1 * x2 * a2;

  if (!cert.V.positive()) {
    cert.reason = "weights are not positive";
    return cert;
  }
  if (std::fabs(cert.cross) > kCrossTolerance) {
    cert.reason = "mixed term does not cancel under these weights";
    return cert;
  }
  if (!(cert.q1 > 0.0)) {
    // a2 y2 - a1 vanishes at the interior equilibrium, so the first diagonal
    // entry is -w1 sigma1^2: nonpositive for every sigma1.
    cert.reason = "first diagonal entry is nonpositive at the interior equilibrium";
    return cert;
  }
  if (!(cert.q2 > 0.0)) {
    cert.reason = "second diagonal entry is nonpositive";
    return cert;
  }
  cert.valid = true;
  cert.reason = "valid";
  return cert;
}

const char* to_string(StabilityKind kind) {
  switch (kind) {
    case StabilityKind::MeanSquareStable: return "mean-square stable";
    case StabilityKind::AsymptoticallyStable: return "asymptotically stable";
    case StabilityKind::Unstable: return "unstable";
    case StabilityKind::Inconclusive: return "inconclusive";
  }
  return "?";
}

StabilityVerdict classify(const LinearSDE& sys, std::optional<QuadraticForm> V) {
  StabilityVerdict verdict;
  const Certificate cert = V ? certificate_from(sys, *V) : certificate_search(sys);
  verdict.certificate = cert;
  if (cert.valid) {
    verdict.kind = StabilityKind::MeanSquareStable;
    verdict.note = "quadratic certificate: -LV is positive definite";
    return verdict;
  }

  if (sys.B.zero()) {
    const LyapunovResult r = deterministic_eig(sys);
    verdict.lyapunov = r;
    if (r.lambda < -1e-9) {
      verdict.kind = StabilityKind::AsymptoticallyStable;
      verdict.note = "deterministic spectrum decides: top real part is negative";
    } else if (r.lambda > 1e-9) {
      verdict.kind = StabilityKind::Unstable;
      verdict.note = "deterministic spectrum decides: top real part is positive";
    } else {
      verdict.note = "top real part sits at zero within tolerance";
    }
    return verdict;
  }

  if (sys.form == NoiseForm::TwoWiener) {
    verdict.note =
        "no certificate found and the density methods need a single Wiener "
        "channel; run the Monte Carlo exponent estimator explicitly";
    return verdict;
  }

  const LyapunovResult r = top_lyapunov(sys, LyapunovMethod::ClosedForm);
  verdict.lyapunov = r;
  const double threshold =
      (r.method == LyapunovMethod::MonteCarlo) ? 3.0 * r.std_error : 1e-9;
  if (r.lambda < -threshold) {
    verdict.kind = StabilityKind::AsymptoticallyStable;
    verdict.note = "top exponent is negative";
  } else if (r.lambda > threshold) {
    verdict.kind = StabilityKind::Unstable;
    verdict.note = "top exponent is positive";
  } else {
    verdict.note = "top exponent is zero within tolerance";
  }
  return verdict;
}

std::string stability_report(const StabilityVerdict& verdict) {
  std::ostringstream out;
  out << "verdict: " << to_string(verdict.kind) << "\n";
  if (verdict.certificate) {
    const Certificate& c = *verdict.certificate;
    out << "certificate: " << (c.valid ? "valid" : "invalid") << " (" << c.reason << ")\n"
        << "  weights w1=" << c.V.w1 << " w2=" << c.V.w2 << "\n"
        << "  -LV diagonal q1=" << c.q1 << " q2=" << c.q2 << " cross=" << c.cross << "\n";
  }
  if (verdict.lyapunov) {
    const LyapunovResult& r = *verdict.lyapunov;
    out << "top exponent: " << r.lambda << " (" << to_string(r.method);
    if (r.method == LyapunovMethod::MonteCarlo)
      out << ", std error " << r.std_error << ", paths " << r.sample_count;
    out << ")\n";
    if (r.fallback_used) out << "  fallback: " << r.note << "\n";
  }
  if (!verdict.note.empty()) out << "note: " << verdict.note << "\n";
  return out.str();
}

}  // namespace tumor_sde

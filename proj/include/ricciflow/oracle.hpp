// Closed-form reference solutions and the tabulated asymptotic laws.
// These are the ground truth the integrator and analyzers are tested against.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "ricciflow/flow.hpp"
#include "ricciflow/geometry.hpp"

namespace ricciflow {

inline constexpr double sqrt6_over_4 = 0.61237243569579452; // sqrt(6)/4

/// Case labels for the qualitative behavior of a run; drives which asymptotic
/// law applies and how the summary is reported.
enum class CaseLabel {
  fixed_point,    // SU2 round point or E2 with A=B
  generic,        // one diverging coefficient, two collapsing like (T+-t)^{1/4}
  su2_symmetric,  // SU2 with A0=B0>C0: infinite-time linear growth
  e11_symmetric,  // E11 with A0=C0: exact solution, two diverging coefficients
  q1,             // SL2R, A blows up
  q2,             // SL2R, B blows up
  s0,             // SL2R boundary regime (A,B blow up together)
};

constexpr std::string_view name(CaseLabel label) {
  switch (label) {
  case CaseLabel::fixed_point:
    return "fixed-point";
  case CaseLabel::generic:
    return "generic";
  case CaseLabel::su2_symmetric:
    return "su2-symmetric";
  case CaseLabel::e11_symmetric:
    return "e11-symmetric";
  case CaseLabel::q1:
    return "q1";
  case CaseLabel::q2:
    return "q2";
  case CaseLabel::s0:
    return "s0-candidate";
  }
  return "?";
}

/// Explicit nil solution through (A0,B0,C0) at t=0, forward time:
///   A(t) = A0 phi^{-1/2}, B(t) = B0 phi^{1/4}, C(t) = C0 phi^{1/4},
///   phi(t) = 1 - (16/3) R0 t,  R0 = -2 A0/(B0 C0) < 0,
/// maximal on (3/(16 R0), +infinity).
inline MetricState nil_solution(double a0, double b0, double c0, double t) {
  if (!(a0 > 0.0 && b0 > 0.0 && c0 > 0.0))
    throw InvalidInput("nil_solution needs positive initial coefficients");
  const double r0 = -2.0 * a0 / (b0 * c0);
  const double t_lo = 3.0 / (16.0 * r0); // negative
  if (!(t > t_lo))
    throw DomainError("t outside the nil solution's maximal interval");
  const double phi = 1.0 - (16.0 / 3.0) * r0 * t;
  MetricState s;
  s.t = t;
  s.a = a0 / std::sqrt(phi);
  const double q = std::pow(phi, 0.25);
  s.b = b0 * q;
  s.c = c0 * q;
  return s;
}

/// Blow-up time of the positive nil flow started at (A0,B0,C0): the forward
/// solution's lower domain endpoint, negated.
inline double nil_blowup_time(double a0, double b0, double c0) {
  const double r0 = -2.0 * a0 / (b0 * c0);
  return -3.0 / (16.0 * r0);
}

/// Exact symmetric E(1,1) solution (A0 = C0, A0^2 B0 = 4) under the positive
/// flow: B(t) = (32/3)(T+ - t), A(t) = C(t) = (sqrt6/4)(T+ - t)^{-1/2},
/// T+ = (3/32) B0.
inline MetricState e11_symmetric(double a0, double b0, double t) {
  if (!(a0 > 0.0 && b0 > 0.0))
    throw InvalidInput("e11_symmetric needs positive initial coefficients");
  const double t_plus = (3.0 / 32.0) * b0;
  const double a_implied = sqrt6_over_4 / std::sqrt(t_plus);
  if (!(std::abs(a0 - a_implied) <= 1e-12 * a_implied))
    throw InconsistentInitialData("A0 does not match (sqrt6/4) T+^{-1/2}");
  if (!(t >= 0.0 && t < t_plus))
    throw DomainError("t outside [0, T+)");
  const double delta = t_plus - t;
  MetricState s;
  s.t = t;
  s.a = s.c = sqrt6_over_4 / std::sqrt(delta);
  s.b = (32.0 / 3.0) * delta;
  return s;
}

inline double e11_symmetric_t_plus(double b0) { return (3.0 / 32.0) * b0; }

/// The flow's stationary points: the SU2 round metric and any flat E2 metric
/// with A = B.  Equality is exact up to 1e-12 relative (canonical data made by
/// identical arithmetic compares bitwise equal).
inline std::optional<MetricState> fixed_point(Bianchi cls, const MetricState& s0) {
  require_valid(s0);
  const auto close = [](double x, double y) {
    return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y));
  };
  if (cls == Bianchi::su2 && close(s0.a, s0.b) && close(s0.b, s0.c))
    return s0;
  if (cls == Bianchi::e2 && close(s0.a, s0.b))
    return s0;
  return std::nullopt;
}

enum class Pivot { blowup_time, infinite_time };

/// One coefficient's asymptotic behavior: X ~ prefactor * pivot^exponent, the
/// pivot variable being (T+ - t) for blow-up laws and t for infinite-time
/// laws.  Prefactor is absent where only existence is known (eta1, eta2).
struct CoefficientLaw {
  double exponent = 0.0;
  std::optional<double> prefactor;
};

struct AsymptoticLaw {
  std::array<CoefficientLaw, 3> coeff;
  Pivot pivot = Pivot::blowup_time;
};

/// Expected exponent/prefactor table per class and case, in the
/// canonical gauge ABC = 4.
inline AsymptoticLaw asymptotic_law(Bianchi cls, CaseLabel label) {
  const CoefficientLaw diverging{-0.5, sqrt6_over_4};
  const CoefficientLaw collapsing{0.25, std::nullopt};
  AsymptoticLaw law;
  switch (cls) {
  case Bianchi::su2:
    if (label == CaseLabel::generic) {
      law.coeff = {diverging, collapsing, collapsing};
      return law;
    }
    if (label == CaseLabel::su2_symmetric) {
      law.coeff = {CoefficientLaw{1.0, 8.0 / 3.0}, CoefficientLaw{1.0, 8.0 / 3.0},
                   CoefficientLaw{-2.0, 9.0 / 16.0}};
      law.pivot = Pivot::infinite_time;
      return law;
    }
    break;
  case Bianchi::e11:
    if (label == CaseLabel::generic) {
      law.coeff = {diverging, collapsing, collapsing};
      return law;
    }
    if (label == CaseLabel::e11_symmetric) {
      law.coeff = {diverging, CoefficientLaw{1.0, 32.0 / 3.0}, diverging};
      return law;
    }
    break;
  case Bianchi::e2:
  case Bianchi::nil:
    if (label == CaseLabel::generic) {
      law.coeff = {diverging, collapsing, collapsing};
      return law;
    }
    break;
  case Bianchi::sl2r:
    switch (label) {
    case CaseLabel::q1:
      law.coeff = {diverging, collapsing, collapsing};
      return law;
    case CaseLabel::q2:
      law.coeff = {collapsing, diverging, collapsing};
      return law;
    case CaseLabel::s0:
      law.coeff = {diverging, diverging, CoefficientLaw{1.0, 32.0 / 3.0}};
      return law;
    default:
      break;
    }
    break;
  }
  throw UnknownCase("no asymptotic law tabulated for this class/case pair");
}

} // namespace ricciflow

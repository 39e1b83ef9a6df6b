// Bianchi classes, Milnor-frame structure signs, diagonal metric states and
// the per-class sectional curvature tables.
//
// Conventions: the frame (f1,f2,f3) has brackets [f2,f3] = 2*eps1*f1,
// [f3,f1] = 2*eps2*f2, [f1,f2] = 2*eps3*f3, and the metric is
// g = A f^1⊗f^1 + B f^2⊗f^2 + C f^3⊗f^3 with A,B,C > 0.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "ricciflow/errors.hpp"

namespace ricciflow {

enum class Bianchi { su2, sl2r, e11, e2, nil };

inline constexpr std::array<Bianchi, 5> all_classes = {
    Bianchi::su2, Bianchi::sl2r, Bianchi::e11, Bianchi::e2, Bianchi::nil};

/// Structure signs (eps1, eps2, eps3) of the Milnor frame.
constexpr std::array<int, 3> structure_signs(Bianchi cls) {
  switch (cls) {
  case Bianchi::su2:
    return {1, 1, 1};
  case Bianchi::sl2r:
    return {-1, 1, 1};
  case Bianchi::e11:
    return {1, 0, -1};
  case Bianchi::e2:
    return {1, 1, 0};
  case Bianchi::nil:
    return {1, 0, 0};
  }
  return {0, 0, 0}; // unreachable
}

constexpr std::string_view name(Bianchi cls) {
  switch (cls) {
  case Bianchi::su2:
    return "su2";
  case Bianchi::sl2r:
    return "sl2r";
  case Bianchi::e11:
    return "e11";
  case Bianchi::e2:
    return "e2";
  case Bianchi::nil:
    return "nil";
  }
  return "?";
}

inline std::optional<Bianchi> parse_class(std::string_view s) {
  for (Bianchi cls : all_classes)
    if (s == name(cls))
      return cls;
  return std::nullopt;
}

/// Diagonal left-invariant metric at flow time t.
struct MetricState {
  double t = 0.0;
  double a = 0.0, b = 0.0, c = 0.0;

  std::array<double, 3> coeffs() const { return {a, b, c}; }
};

inline bool positive_finite(const MetricState& s) {
  return std::isfinite(s.a) && std::isfinite(s.b) && std::isfinite(s.c) &&
         s.a > 0.0 && s.b > 0.0 && s.c > 0.0;
}

inline void require_valid(const MetricState& s) {
  if (!positive_finite(s))
    throw InvalidInput("metric coefficients must be positive and finite");
}

/// Sectional curvatures of the coordinate 2-planes plus the scalar curvature.
struct Curvatures {
  double k23 = 0.0, k31 = 0.0, k12 = 0.0;
  double r = 0.0; // always 2*(k23 + k31 + k12), same arithmetic
};

// Per-class curvature tables, implemented exactly as printed (no algebraic
// simplification); the flow module's reconstruction test guards against
// transcription errors.
inline Curvatures sectional_curvatures(Bianchi cls, const MetricState& s) {
  require_valid(s);
  const double a = s.a, b = s.b, c = s.c;
  const double abc = a * b * c;
  Curvatures k;
  switch (cls) {
  case Bianchi::su2:
    k.k23 = (b - c) * (b - c) / abc - 3.0 * a / (b * c) + 2.0 / b + 2.0 / c;
    k.k31 = (c - a) * (c - a) / abc - 3.0 * b / (c * a) + 2.0 / c + 2.0 / a;
    k.k12 = (a - b) * (a - b) / abc - 3.0 * c / (a * b) + 2.0 / a + 2.0 / b;
    break;
  case Bianchi::sl2r:
    k.k23 = (-3.0 * a * a + b * b + c * c - 2.0 * b * c - 2.0 * a * c - 2.0 * a * b) / abc;
    k.k31 = (-3.0 * b * b + a * a + c * c + 2.0 * b * c + 2.0 * a * c - 2.0 * a * b) / abc;
    k.k12 = (-3.0 * c * c + a * a + b * b + 2.0 * b * c - 2.0 * a * c + 2.0 * a * b) / abc;
    break;
  case Bianchi::e11:
    k.k23 = ((a - c) * (a - c) - 4.0 * a * a) / abc;
    k.k31 = (a + c) * (a + c) / abc;
    k.k12 = ((a - c) * (a - c) - 4.0 * c * c) / abc;
    break;
  case Bianchi::e2:
    k.k23 = (b - a) * (b + 3.0 * a) / abc;
    k.k31 = (a - b) * (a + 3.0 * b) / abc;
    k.k12 = (a - b) * (a - b) / abc;
    break;
  case Bianchi::nil:
    // Not printed in the source tables; fixed by R = -2A/(BC) together with
    // reconstruction of the nil flow system (see the flow tests).
    k.k23 = -3.0 * a / (b * c);
    k.k31 = a / (b * c);
    k.k12 = a / (b * c);
    break;
  }
  k.r = 2.0 * (k.k23 + k.k31 + k.k12);
  return k;
}

inline double scalar_curvature(Bianchi cls, const MetricState& s) {
  return sectional_curvatures(cls, s).r;
}

} // namespace ricciflow

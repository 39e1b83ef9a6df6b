// Canonicalization and adaptive integration of the normalized flows.
//
// Integration runs in log coordinates (u,v,w) = (ln A, ln B, ln C), where the
// conserved product is the linear constraint u+v+w = ln(product) and
// positivity is structural.  The stepper is a Dormand-Prince 5(4) embedded
// pair with PI step control; near blow-up the step is capped at 5% of the
// running (T+ - t) estimate so samples fall geometrically, dense enough for
// the log-log fits downstream.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "ricciflow/flow.hpp"
#include "ricciflow/geometry.hpp"

namespace ricciflow {

struct Controls {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_coeff = 1e8;   // blow-up ceiling
  double min_step = 1e-14;  // smallest dt before declaring stagnation
  std::size_t max_samples = std::size_t{1} << 18;
  bool renormalize = true;  // project the product back each accepted step
  double horizon = std::numeric_limits<double>::infinity();
};

enum class Terminal { reached_tmax, blowup_ceiling, step_underflow };

constexpr std::string_view name(Terminal t) {
  switch (t) {
  case Terminal::reached_tmax:
    return "ReachedTmax";
  case Terminal::blowup_ceiling:
    return "BlowupCeiling";
  case Terminal::step_underflow:
    return "StepUnderflow";
  }
  return "?";
}

struct Canonicalization {
  double lambda = 1.0;
  // canonical coefficient i is input[permutation[i]] / lambda
  std::array<int, 3> permutation{0, 1, 2};
  MetricState canonical_initial;
};

/// Rescale to A0 B0 C0 = 4 and reorder with a bracket-preserving permutation
/// so the class's conventional ordering holds (SU2: full sort descending;
/// E11: A>=C; E2: A>=B; SL2R: B>=C; nil: none).
inline Canonicalization canonicalize(Bianchi cls, double a0, double b0, double c0,
                                     bool allow_swap = true) {
  const std::array<double, 3> in{a0, b0, c0};
  for (double x : in)
    if (!(std::isfinite(x) && x > 0.0))
      throw InvalidInput("initial coefficients must be positive and finite");

  Canonicalization canon;
  auto& p = canon.permutation;
  switch (cls) {
  case Bianchi::su2:
    std::stable_sort(p.begin(), p.end(), [&](int i, int j) { return in[i] > in[j]; });
    break;
  case Bianchi::e11:
    if (in[2] > in[0])
      p = {2, 1, 0};
    break;
  case Bianchi::e2:
    if (in[1] > in[0])
      p = {1, 0, 2};
    break;
  case Bianchi::sl2r:
    if (in[2] > in[1])
      p = {0, 2, 1};
    break;
  case Bianchi::nil:
    break;
  }
  if (!allow_swap && p != std::array<int, 3>{0, 1, 2})
    throw InvalidInput("initial data violates the class ordering and swaps are disabled");

  canon.lambda = std::cbrt(a0 * b0 * c0 / 4.0);
  canon.canonical_initial =
      MetricState{0.0, in[p[0]] / canon.lambda, in[p[1]] / canon.lambda, in[p[2]] / canon.lambda};
  return canon;
}

struct Sample {
  MetricState state;
  Curvatures curv;
  double product_drift = 0.0;      // |ABC - product| / product
  std::array<double, 3> logc{};    // (ln A, ln B, ln C), exact source of state
  std::array<double, 3> dlog{};    // d/dt of logc, for Hermite interpolation
};

struct Trajectory {
  FlowSpec spec;
  std::vector<Sample> samples;
  Terminal terminal = Terminal::reached_tmax;
  std::optional<double> t_plus_estimate;
  bool renormalized = true;

  const Sample& front() const { return samples.front(); }
  const Sample& back() const { return samples.back(); }

  /// Cubic Hermite interpolation in log coordinates; t clamped to the sampled
  /// range.
  MetricState state_at(double t) const {
    if (samples.empty())
      throw InsufficientData("empty trajectory");
    const auto lo = samples.front().state.t, hi = samples.back().state.t;
    t = std::clamp(t, lo, hi);
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const Sample& s, double v) { return s.state.t < v; });
    if (it == samples.begin())
      ++it;
    if (it == samples.end())
      --it;
    const Sample& s1 = *it;
    const Sample& s0 = *(it - 1);
    const double d = s1.state.t - s0.state.t;
    const double x = d > 0.0 ? (t - s0.state.t) / d : 0.0;
    const double h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
    const double h10 = x * (1.0 - x) * (1.0 - x);
    const double h01 = x * x * (3.0 - 2.0 * x);
    const double h11 = x * x * (x - 1.0);
    MetricState out;
    out.t = t;
    std::array<double, 3> u;
    for (int i = 0; i < 3; ++i)
      u[i] = h00 * s0.logc[i] + h10 * d * s0.dlog[i] + h01 * s1.logc[i] + h11 * d * s1.dlog[i];
    out.a = std::exp(u[0]);
    out.b = std::exp(u[1]);
    out.c = std::exp(u[2]);
    return out;
  }
};

namespace detail {

using Vec3 = std::array<double, 3>;

// Derivative of the log coordinates.
inline Vec3 log_rhs(const FlowSpec& spec, double t, const Vec3& y) {
  MetricState s{t, std::exp(y[0]), std::exp(y[1]), std::exp(y[2])};
  const StateDerivative d = rhs(spec, s);
  return {d.da / s.a, d.db / s.b, d.dc / s.c};
}

// T+ from a linear fit of X^{-2} against t over the last decade of the
// fastest-growing coefficient, with one 3-sigma outlier refit.  Times are
// centered on the final sample for conditioning.
inline std::optional<double> blowup_time_fit(const std::vector<Sample>& samples) {
  if (samples.size() < 10)
    return std::nullopt;
  const Sample& last = samples.back();
  int ix = 0;
  for (int i = 1; i < 3; ++i)
    if (last.dlog[i] > last.dlog[ix])
      ix = i;
  if (!(last.dlog[ix] > 0.0))
    return std::nullopt;
  const double x_n = last.state.coeffs()[ix];
  const double t_n = last.state.t;

  std::vector<double> s, y;
  for (const Sample& smp : samples) {
    const double x = smp.state.coeffs()[ix];
    if (x >= 0.1 * x_n) {
      s.push_back(smp.state.t - t_n);
      y.push_back(1.0 / (x * x));
    }
  }
  if (s.size() < 10)
    return std::nullopt;

  const auto fit = [&](const std::vector<char>& keep) -> std::optional<std::array<double, 2>> {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!keep[i])
        continue;
      n += 1;
      sx += s[i];
      sy += y[i];
      sxx += s[i] * s[i];
      sxy += s[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (!(n >= 2 && std::abs(det) > 0.0))
      return std::nullopt;
    const double slope = (n * sxy - sx * sy) / det;
    const double intercept = (sy * sxx - sx * sxy) / det;
    return std::array<double, 2>{intercept, slope};
  };

  std::vector<char> keep(s.size(), 1);
  auto ab = fit(keep);
  if (!ab || !((*ab)[1] < 0.0))
    return std::nullopt;
  double ssr = 0;
  std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - ((*ab)[0] + (*ab)[1] * s[i]);
    ssr += r * r;
  }
  if (n > 2 && ssr > 0.0) {
    const double sigma = std::sqrt(ssr / double(n - 2));
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
      keep[i] = std::abs(y[i] - ((*ab)[0] + (*ab)[1] * s[i])) <= 3.0 * sigma;
      kept += keep[i];
    }
    if (kept >= 10 && kept < n) {
      auto refit = fit(keep);
      if (refit && (*refit)[1] < 0.0)
        ab = refit;
    }
  }
  return t_n - (*ab)[0] / (*ab)[1];
}

} // namespace detail

/// Integrate the flow from s0 (product must match spec.product) until the
/// horizon, the blow-up ceiling, or step stagnation.
inline Trajectory integrate(const FlowSpec& spec, const MetricState& s0, const Controls& ctl) {
  require_valid(s0);
  detail::check_product(spec, s0);
  if (!(ctl.rel_tol > 0.0 && ctl.abs_tol > 0.0 && ctl.max_coeff > 10.0 && ctl.min_step > 0.0 &&
        ctl.max_samples >= 16))
    throw InvalidInput("bad integration controls");

  using detail::Vec3;
  Trajectory traj;
  traj.spec = spec;
  traj.renormalized = ctl.renormalize;

  const double ln_p = std::log(spec.product);
  const double t0 = s0.t;
  const double t_end = ctl.horizon;
  const double blowup_suspect = std::min(1e3, 0.1 * ctl.max_coeff);

  double t = t0;
  Vec3 y{std::log(s0.a), std::log(s0.b), std::log(s0.c)};

  const auto renorm = [&](Vec3& z) {
    if (!ctl.renormalize)
      return;
    const double m = (z[0] + z[1] + z[2] - ln_p) / 3.0;
    z[0] -= m;
    z[1] -= m;
    z[2] -= m;
  };

  std::size_t stride = 1, since_record = 0;
  const auto record = [&](const Vec3& z, double tt, const Vec3& dl, bool force) {
    if (!force && ++since_record < stride)
      return;
    since_record = 0;
    Sample smp;
    smp.logc = z;
    smp.state = MetricState{tt, std::exp(z[0]), std::exp(z[1]), std::exp(z[2])};
    smp.dlog = dl;
    smp.curv = sectional_curvatures(spec.cls, smp.state);
    smp.product_drift =
        std::abs(smp.state.a * smp.state.b * smp.state.c - spec.product) / spec.product;
    if (!traj.samples.empty() && traj.samples.back().state.t == tt)
      traj.samples.back() = smp;
    else
      traj.samples.push_back(smp);
    if (traj.samples.size() >= ctl.max_samples) {
      // halve the density, keep endpoints
      std::vector<Sample> thin;
      thin.reserve(traj.samples.size() / 2 + 1);
      for (std::size_t i = 0; i < traj.samples.size(); i += 2)
        thin.push_back(traj.samples[i]);
      if (thin.back().state.t != traj.samples.back().state.t)
        thin.push_back(traj.samples.back());
      traj.samples = std::move(thin);
      stride *= 2;
    }
  };

  renorm(y);
  Vec3 k1 = detail::log_rhs(spec, t, y);
  record(y, t, k1, true);

  if (t >= t_end) {
    traj.terminal = Terminal::reached_tmax;
    return traj;
  }

  // initial step guess; the controller corrects it within a few steps
  double h;
  {
    double rate = 0.0;
    for (double d : k1)
      rate = std::max(rate, std::abs(d));
    h = 1e-2 / std::max(rate, 1e-8);
    if (std::isfinite(t_end))
      h = std::min(h, t_end - t);
  }

  // Dormand-Prince 5(4) tableau
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double facold = 1e-4;
  bool last_rejected = false;

  while (true) {
    if (t >= t_end) {
      traj.terminal = Terminal::reached_tmax;
      break;
    }

    // largest coefficient and its growth rate, for the blow-up cap
    int imax = 0;
    for (int i = 1; i < 3; ++i)
      if (y[i] > y[imax])
        imax = i;
    const double coeff_max = std::exp(y[imax]);
    bool cap_active = false;
    if (coeff_max >= blowup_suspect && k1[imax] > 0.0) {
      const double delta_est = 1.0 / (2.0 * k1[imax]); // X/(2 dX/dt)
      if (h > 0.05 * delta_est) {
        h = 0.05 * delta_est;
        cap_active = true;
      }
    }
    // the very last step toward a finite horizon may be arbitrarily small
    const bool finishing = std::isfinite(t_end) && t + 1.01 * h >= t_end;
    if (finishing)
      h = t_end - t;

    if (finishing && t + h == t) {
      traj.terminal = Terminal::reached_tmax;
      break;
    }
    if (!finishing && (!(h >= ctl.min_step) || t + h == t)) {
      // Step stagnation.  If the largest coefficient is already deep in a
      // confirmed divergence this is the blow-up landing (the cap shrinks the
      // step below representable increments before the ceiling is touched);
      // anything else is a genuine failure.
      const bool divergence = coeff_max >= blowup_suspect && k1[imax] > 0.0;
      traj.terminal = divergence ? Terminal::blowup_ceiling : Terminal::step_underflow;
      break;
    }

    // stages
    const auto stage = [&](const Vec3& base, double frac) {
      return detail::log_rhs(spec, t + frac * h, base);
    };
    Vec3 w;
    for (int i = 0; i < 3; ++i)
      w[i] = y[i] + h * a21 * k1[i];
    const Vec3 k2 = stage(w, c2);
    for (int i = 0; i < 3; ++i)
      w[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const Vec3 k3 = stage(w, c3);
    for (int i = 0; i < 3; ++i)
      w[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const Vec3 k4 = stage(w, c4);
    for (int i = 0; i < 3; ++i)
      w[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const Vec3 k5 = stage(w, c5);
    for (int i = 0; i < 3; ++i)
      w[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const Vec3 k6 = stage(w, 1.0);
    Vec3 ynew;
    for (int i = 0; i < 3; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const Vec3 k7 = detail::log_rhs(spec, t + h, ynew);

    double err = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      // error in a log component is the coefficient's relative error
      const double sc = ctl.rel_tol + ctl.abs_tol / std::exp(y[i]);
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / 3.0);

    if (err <= 1.0) {
      t += h;
      y = ynew;
      renorm(y);
      k1 = detail::log_rhs(spec, t, y);
      record(y, t, k1, false);

      double ceiling = std::exp(*std::max_element(y.begin(), y.end()));
      if (ceiling >= ctl.max_coeff) {
        record(y, t, k1, true);
        traj.terminal = Terminal::blowup_ceiling;
        break;
      }
      if (t >= t_end) {
        record(y, t, k1, true);
        traj.terminal = Terminal::reached_tmax;
        break;
      }

      double fac = 0.9 * std::pow(err, -0.17) * std::pow(facold, 0.04);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 6.0);
      facold = std::max(err, 1e-4);
      h *= fac;
      last_rejected = false;
      (void)cap_active;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      last_rejected = true;
    }
  }

  // terminal state is always a recorded sample
  record(y, t, k1, true);

  if (traj.terminal == Terminal::blowup_ceiling)
    traj.t_plus_estimate = detail::blowup_time_fit(traj.samples);
  return traj;
}

/// T+ from the recorded samples of a blow-up run.
inline double estimate_blowup_time(const Trajectory& traj) {
  if (traj.terminal != Terminal::blowup_ceiling)
    throw InsufficientData("blow-up time needs a BlowupCeiling trajectory");
  const auto t = detail::blowup_time_fit(traj.samples);
  if (!t)
    throw InsufficientData("fewer than 10 usable samples in the final decade");
  return *t;
}

/// Max relative deviation between the flow from lambda*s0 (product 4 lambda^3)
/// and the lambda-rescaled, time-dilated flow from s0.  Zero by construction
/// at lambda = 1; otherwise a genuine two-integration comparison.
inline double scaling_check(const FlowSpec& spec, const MetricState& s0, double lambda,
                            double horizon, const Controls& ctl = {}) {
  if (!(lambda >= 0.1 && lambda <= 10.0))
    throw InvalidInput("lambda outside [0.1, 10]");
  if (!std::isfinite(horizon) || !(horizon > s0.t))
    throw InvalidInput("scaling_check needs a finite horizon");

  Controls base_ctl = ctl;
  base_ctl.horizon = horizon;
  const Trajectory base = integrate(spec, s0, base_ctl);

  FlowSpec scaled_spec = spec;
  scaled_spec.product = spec.product * lambda * lambda * lambda;
  MetricState scaled0{s0.t * lambda, lambda * s0.a, lambda * s0.b, lambda * s0.c};
  Controls scaled_ctl = ctl;
  scaled_ctl.horizon = horizon * lambda;
  const Trajectory scaled = integrate(scaled_spec, scaled0, scaled_ctl);

  double worst = 0.0;
  for (const Sample& smp : scaled.samples) {
    const MetricState ref = base.state_at(smp.state.t / lambda);
    const std::array<double, 3> got = smp.state.coeffs();
    const std::array<double, 3> want = ref.coeffs();
    for (int i = 0; i < 3; ++i)
      worst = std::max(worst, std::abs(got[i] - lambda * want[i]) / (lambda * want[i]));
  }
  return worst;
}

} // namespace ricciflow

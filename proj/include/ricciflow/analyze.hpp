// Post-processing of integrated trajectories: power-law fits near blow-up,
// eta prefactors, SL(2,R) case classification with boundary bisection, and
// the sub-Riemannian limit extraction.  All fits work on delta = T+ - t in
// log-log form and use windows keyed to the smallest resolved delta, so the
// results are insensitive to where the integration stopped.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ricciflow/integrate.hpp"
#include "ricciflow/oracle.hpp"

namespace ricciflow {

struct CoefficientFit {
  double exponent = 0.0;   // X ~ prefactor * delta^exponent
  double prefactor = 0.0;
  double r_squared = 0.0;
};

struct ExponentFit {
  std::array<CoefficientFit, 3> coeff;
  double window_lo = 0.0;  // delta range actually used
  double window_hi = 0.0;
};

namespace detail {

struct WindowedSamples {
  std::vector<const Sample*> in_window;
  double lo = 0.0, hi = 0.0;
};

// Samples with delta = t_plus - t inside [delta_min*10^off_lo, delta_min*10^off_hi],
// where delta_min is the smallest delta in the trackable range [1e-12, 1e-2].
inline WindowedSamples window_by_delta(const Trajectory& traj, double t_plus, double off_lo,
                                       double off_hi) {
  double delta_min = std::numeric_limits<double>::infinity();
  double delta_max = 0.0;
  for (const Sample& s : traj.samples) {
    const double d = t_plus - s.state.t;
    if (d >= 1e-12 && d <= 1e-2) {
      delta_min = std::min(delta_min, d);
      delta_max = std::max(delta_max, d);
    }
  }
  if (!std::isfinite(delta_min))
    throw InsufficientData("no samples with delta in [1e-12, 1e-2]");
  WindowedSamples w;
  w.lo = delta_min * std::pow(10.0, off_lo);
  w.hi = delta_min * std::pow(10.0, off_hi);
  if (w.hi > delta_max)
    throw InsufficientData("trajectory does not span the fit window");
  for (const Sample& s : traj.samples) {
    const double d = t_plus - s.state.t;
    if (d >= w.lo && d <= w.hi)
      w.in_window.push_back(&s);
  }
  if (w.in_window.size() < 10)
    throw InsufficientData("fewer than 10 samples in the fit window");
  return w;
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, r_squared = 1.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  LineFit f;
  const double det = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

inline double median(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  double hi = v[m];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + m - 1, v.begin() + m);
    return 0.5 * (v[m - 1] + hi);
  }
  return hi;
}

} // namespace detail

/// Power laws X_i ~ eta_i * delta^{p_i} fitted over two decades of delta,
/// excluding the last half-decade before the recorded end (where step capping
/// and the T+ uncertainty bite).
inline ExponentFit fit_exponents(const Trajectory& traj, double t_plus) {
  const auto w = detail::window_by_delta(traj, t_plus, 0.5, 2.5);
  ExponentFit out;
  out.window_lo = w.lo;
  out.window_hi = w.hi;
  std::vector<double> x(w.in_window.size());
  for (std::size_t i = 0; i < w.in_window.size(); ++i)
    x[i] = std::log(t_plus - w.in_window[i]->state.t);
  std::vector<double> y(w.in_window.size());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < w.in_window.size(); ++i)
      y[i] = w.in_window[i]->logc[c];
    const auto f = detail::fit_line(x, y);
    out.coeff[c].exponent = f.slope;
    out.coeff[c].prefactor = std::exp(f.intercept);
    out.coeff[c].r_squared = f.r_squared;
  }
  return out;
}

struct EtaEstimate {
  double eta1 = 0.0;  // first collapsing coefficient, frame order
  double eta2 = 0.0;
  std::array<double, 2> interval1{};
  std::array<double, 2> interval2{};
  int index1 = 1, index2 = 2;  // which coefficients collapse
};

/// Prefactors of the two delta^{1/4} coefficients, as medians of
/// X * delta^{-1/4} over the final resolved decade, with min/max spread.
inline EtaEstimate estimate_eta(const Trajectory& traj, double t_plus) {
  const ExponentFit fit = fit_exponents(traj, t_plus);
  std::vector<int> quarter;
  for (int c = 0; c < 3; ++c)
    if (std::abs(fit.coeff[c].exponent - 0.25) <= 0.05)
      quarter.push_back(c);
  if (quarter.size() != 2)
    throw WrongCase("expected exactly two coefficients with exponent 1/4");

  const auto w = detail::window_by_delta(traj, t_plus, 0.5, 1.5);
  EtaEstimate out;
  out.index1 = quarter[0];
  out.index2 = quarter[1];
  std::array<std::vector<double>, 2> vals;
  for (const Sample* s : w.in_window) {
    const double d = t_plus - s->state.t;
    const double root = std::pow(d, 0.25);
    vals[0].push_back(s->state.coeffs()[quarter[0]] / root);
    vals[1].push_back(s->state.coeffs()[quarter[1]] / root);
  }
  out.eta1 = detail::median(vals[0]);
  out.eta2 = detail::median(vals[1]);
  const auto mm1 = std::minmax_element(vals[0].begin(), vals[0].end());
  const auto mm2 = std::minmax_element(vals[1].begin(), vals[1].end());
  out.interval1 = {*mm1.first, *mm1.second};
  out.interval2 = {*mm2.first, *mm2.second};
  return out;
}

struct SL2RClassification {
  enum class Label { q1, q2, undetermined };
  Label label = Label::undetermined;
  std::optional<double> trigger_time;
  double margin = 0.0;  // signed distance to the trigger at the final sample
};

constexpr std::string_view name(SL2RClassification::Label l) {
  switch (l) {
  case SL2RClassification::Label::q1:
    return "Q1";
  case SL2RClassification::Label::q2:
    return "Q2";
  case SL2RClassification::Label::undetermined:
    return "Undetermined";
  }
  return "?";
}

/// Scan for the first sample hitting either absorbing trigger: A >= B (case 1)
/// or A <= B - C (case 2).  Both conditions are non-strict and checked in
/// sample order; initial data already past a trigger classifies at t0.
inline SL2RClassification classify_sl2r(const Trajectory& traj) {
  if (traj.spec.cls != Bianchi::sl2r || traj.spec.direction != Direction::positive)
    throw WrongCase("classification applies to the positive SL(2,R) flow");
  if (traj.samples.empty())
    throw InsufficientData("empty trajectory");
  SL2RClassification out;
  for (const Sample& s : traj.samples) {
    if (s.state.a >= s.state.b) {
      out.label = SL2RClassification::Label::q1;
      out.trigger_time = s.state.t;
      break;
    }
    if (s.state.a <= s.state.b - s.state.c) {
      out.label = SL2RClassification::Label::q2;
      out.trigger_time = s.state.t;
      break;
    }
  }
  const MetricState& f = traj.samples.back().state;
  switch (out.label) {
  case SL2RClassification::Label::q1:
    out.margin = f.a - f.b;
    break;
  case SL2RClassification::Label::q2:
    out.margin = (f.b - f.c) - f.a;
    break;
  case SL2RClassification::Label::undetermined:
    out.margin = std::max(f.a - f.b, (f.b - f.c) - f.a);
    break;
  }
  return out;
}

/// One-parameter family of SL(2,R) initial data; must keep A0 B0 C0 = 4 and
/// B0 >= C0 across the bisection range.
using InitialFamily = std::function<std::array<double, 3>(double)>;

struct BoundaryBracket {
  double x_lo = 0.0, x_hi = 0.0;
  SL2RClassification::Label label_lo = SL2RClassification::Label::undetermined;
  SL2RClassification::Label label_hi = SL2RClassification::Label::undetermined;
  // slope of ln C against ln delta at the bracket midpoint, over the last
  // decade of delta before its trigger (NaN when not resolvable)
  double midpoint_c_exponent = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline Trajectory run_family_point(const InitialFamily& family, double x, const Controls& ctl) {
  const auto [a, b, c] = family(x);
  if (!(a > 0 && b > 0 && c > 0) || std::abs(a * b * c - 4.0) > 1e-9 * 4.0 || b < c)
    throw InvalidInput("family point leaves the canonical slice");
  return integrate(FlowSpec{Bianchi::sl2r, Direction::positive, 4.0}, MetricState{0, a, b, c}, ctl);
}

// For an undetermined run, guess the side from whichever trigger the final
// sample sits closer to.
inline SL2RClassification::Label effective_label(const SL2RClassification& cls,
                                                 const Trajectory& traj) {
  if (cls.label != SL2RClassification::Label::undetermined)
    return cls.label;
  const MetricState& f = traj.samples.back().state;
  return (f.a - f.b >= (f.b - f.c) - f.a) ? SL2RClassification::Label::q1
                                          : SL2RClassification::Label::q2;
}

} // namespace detail

/// Bisect the Q1/Q2 boundary along a family of initial data.  Endpoints must
/// classify determinately and differently; the interval shrinks to `width`.
inline BoundaryBracket locate_boundary(const InitialFamily& family, double x_lo, double x_hi,
                                       const Controls& ctl = {}, double width = 1e-6) {
  if (!(std::isfinite(x_lo) && std::isfinite(x_hi) && x_lo < x_hi))
    throw InvalidInput("bad bisection interval");
  Trajectory tr_lo = detail::run_family_point(family, x_lo, ctl);
  Trajectory tr_hi = detail::run_family_point(family, x_hi, ctl);
  const SL2RClassification cls_lo = classify_sl2r(tr_lo);
  const SL2RClassification cls_hi = classify_sl2r(tr_hi);
  if (cls_lo.label == SL2RClassification::Label::undetermined ||
      cls_hi.label == SL2RClassification::Label::undetermined)
    throw InvalidInput("endpoint classification is undetermined");
  if (cls_lo.label == cls_hi.label)
    throw SameLabel("both endpoints classify identically");

  double lo = x_lo, hi = x_hi;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;  // interval at floating-point resolution
    Trajectory tr = detail::run_family_point(family, mid, ctl);
    const auto lab = detail::effective_label(classify_sl2r(tr), tr);
    if (lab == cls_lo.label)
      lo = mid;
    else
      hi = mid;
  }

  BoundaryBracket out;
  out.x_lo = lo;
  out.x_hi = hi;
  out.label_lo = cls_lo.label;
  out.label_hi = cls_hi.label;

  // C-exponent at the midpoint over its pre-trigger decade
  const double mid = 0.5 * (lo + hi);
  Trajectory tr = detail::run_family_point(family, mid, ctl);
  const SL2RClassification mid_cls = classify_sl2r(tr);
  const double t_cut =
      mid_cls.trigger_time ? *mid_cls.trigger_time : tr.samples.back().state.t;
  if (tr.t_plus_estimate) {
    const double tp = *tr.t_plus_estimate;
    double dmin = std::numeric_limits<double>::infinity();
    for (const Sample& s : tr.samples)
      if (s.state.t < t_cut && tp - s.state.t > 0)
        dmin = std::min(dmin, tp - s.state.t);
    if (std::isfinite(dmin)) {
      std::vector<double> x, y;
      for (const Sample& s : tr.samples) {
        const double d = tp - s.state.t;
        if (s.state.t < t_cut && d >= dmin && d <= 10.0 * dmin) {
          x.push_back(std::log(d));
          y.push_back(s.logc[2]);
        }
      }
      if (x.size() >= 5)
        out.midpoint_c_exponent = detail::fit_line(x, y).slope;
    }
  }
  return out;
}

struct SubRiemannianLimit {
  int reference = 1;                   // index of the collapsing reference coefficient
  std::array<int, 2> surviving{1, 2};  // indices rescaled to a finite limit
  std::array<double, 2> limit_metric_coeffs{};
  std::array<double, 2> dual_coeffs{};
  double eta_ratio = 0.0;              // second surviving / first surviving
  std::array<double, 2> eta_ratio_interval{};
};

/// Rescale the metric by the collapsing reference so the two delta^{1/4}
/// directions converge; the blow-up direction diverges and drops out.  The
/// reference is class/case specific: B for SU2, E11 and E2, C for SL2R case 1
/// and nil, A for SL2R case 2.
inline SubRiemannianLimit subriemannian_limit(const Trajectory& traj, double t_plus, Bianchi cls,
                                              CaseLabel label) {
  if (cls != traj.spec.cls)
    throw InvalidInput("class does not match the trajectory");
  int ref = -1;
  switch (cls) {
  case Bianchi::su2:
  case Bianchi::e11:
  case Bianchi::e2:
    if (label == CaseLabel::generic)
      ref = 1;
    break;
  case Bianchi::sl2r:
    if (label == CaseLabel::q1)
      ref = 2;
    else if (label == CaseLabel::q2)
      ref = 0;
    break;
  case Bianchi::nil:
    if (label == CaseLabel::generic)
      ref = 2;
    break;
  }
  if (ref < 0)
    throw WrongCase("no sub-Riemannian limit for this class/case");

  const ExponentFit fit = fit_exponents(traj, t_plus);
  int diverging = -1;
  for (int c = 0; c < 3; ++c) {
    if (std::abs(fit.coeff[c].exponent + 0.5) <= 0.05) {
      if (diverging >= 0)
        throw WrongCase("more than one diverging coefficient");
      diverging = c;
    }
  }
  if (diverging < 0 || diverging == ref)
    throw WrongCase("no single diverging coefficient away from the reference");

  SubRiemannianLimit out;
  out.reference = ref;
  int k = 0;
  for (int c = 0; c < 3; ++c)
    if (c != diverging)
      out.surviving[k++] = c;

  const auto w = detail::window_by_delta(traj, t_plus, 0.5, 1.5);
  // the blow-up direction must actually run away inside the window
  for (std::size_t i = 1; i < w.in_window.size(); ++i)
    if (w.in_window[i]->state.coeffs()[diverging] <=
        w.in_window[i - 1]->state.coeffs()[diverging])
      throw WrongCase("blow-up coefficient is not monotone over the fit window");

  const double ref0 = traj.samples.front().state.coeffs()[ref];
  std::array<std::vector<double>, 2> vals;
  std::vector<double> ratios;
  for (const Sample* s : w.in_window) {
    const auto c = s->state.coeffs();
    const double rho = ref0 / c[ref];
    vals[0].push_back(rho * c[out.surviving[0]]);
    vals[1].push_back(rho * c[out.surviving[1]]);
    ratios.push_back(c[out.surviving[1]] / c[out.surviving[0]]);
  }
  out.limit_metric_coeffs = {detail::median(vals[0]), detail::median(vals[1])};
  out.dual_coeffs = {1.0 / out.limit_metric_coeffs[0], 1.0 / out.limit_metric_coeffs[1]};
  out.eta_ratio = detail::median(ratios);
  const auto mm = std::minmax_element(ratios.begin(), ratios.end());
  out.eta_ratio_interval = {*mm.first, *mm.second};
  return out;
}

struct InvariantCheck {
  std::string label;
  bool pass = true;
  double worst = 0.0;  // worst signed violation, <= tolerance when passing
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;
  bool all_pass = true;
};

namespace detail {

using Extract = std::function<double(const Sample&)>;

inline void check_monotone(InvariantReport& rep, const Trajectory& traj, const std::string& label,
                           const Extract& get, int dir, double slack = 1e-10) {
  // dir +1: nondecreasing, -1: nonincreasing; violations measured relative to
  // the local magnitude
  double worst = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const double prev = get(traj.samples[i - 1]);
    const double cur = get(traj.samples[i]);
    const double scale = std::max({std::abs(prev), std::abs(cur), 1e-300});
    worst = std::max(worst, double(dir) * (prev - cur) / scale);
  }
  rep.checks.push_back({label, worst <= slack, worst});
}

inline void check_bound(InvariantReport& rep, const std::string& label, double worst, double tol) {
  rep.checks.push_back({label, worst <= tol, worst});
}

} // namespace detail

/// Evaluate every invariant the trajectory's class and direction promise:
/// sample sanity and product drift always; the monotonicity facts on the
/// positive flow per class; closed-form conservation laws where they exist.
inline InvariantReport invariant_report(const Trajectory& traj) {
  if (traj.samples.size() < 2)
    throw InsufficientData("need at least two samples");
  InvariantReport rep;
  const auto& ss = traj.samples;
  const bool positive = traj.spec.direction == Direction::positive;
  const MetricState first = ss.front().state;

  {
    double worst = 0.0;
    for (std::size_t i = 1; i < ss.size(); ++i)
      worst = std::max(worst, ss[i - 1].state.t - ss[i].state.t);
    // strictness: equal times count as a violation
    bool strict = worst < 0.0 || [&] {
      for (std::size_t i = 1; i < ss.size(); ++i)
        if (ss[i].state.t <= ss[i - 1].state.t)
          return false;
      return true;
    }();
    rep.checks.push_back({"times strictly increasing", strict, std::max(worst, 0.0)});
  }
  {
    double bad = 0.0;
    for (const Sample& s : ss)
      if (!positive_finite(s.state))
        bad += 1.0;
    detail::check_bound(rep, "coefficients positive and finite", bad, 0.0);
  }
  {
    double worst = 0.0;
    for (const Sample& s : ss)
      worst = std::max(worst, s.product_drift);
    detail::check_bound(rep, "product drift", worst, traj.renormalized ? 1e-9 : 1e-6);
  }

  const auto A = [](const Sample& s) { return s.state.a; };
  const auto B = [](const Sample& s) { return s.state.b; };
  const auto C = [](const Sample& s) { return s.state.c; };
  const double rel = 1e-12;

  switch (traj.spec.cls) {
  case Bianchi::su2: {
    if (!positive)
      break;
    const bool round = std::abs(first.a - first.b) <= rel * first.a &&
                       std::abs(first.b - first.c) <= rel * first.b;
    if (round) {
      double worst = 0.0;
      for (const Sample& s : ss)
        for (int i = 0; i < 3; ++i)
          worst = std::max(worst,
                           std::abs(s.state.coeffs()[i] - first.coeffs()[i]) / first.coeffs()[i]);
      detail::check_bound(rep, "round fixed point stationary", worst, 1e-10);
      break;
    }
    {
      double worst = 0.0;
      for (const Sample& s : ss)
        worst = std::max({worst, (s.state.b - s.state.a) / s.state.a,
                          (s.state.c - s.state.b) / s.state.b});
      detail::check_bound(rep, "ordering A >= B >= C", worst, 1e-10);
    }
    detail::check_monotone(rep, traj, "A nondecreasing", A, +1);
    detail::check_monotone(rep, traj, "C nonincreasing", C, -1);
    detail::check_monotone(rep, traj, "A - B nondecreasing",
                           [](const Sample& s) { return s.state.a - s.state.b; }, +1);
    detail::check_monotone(rep, traj, "A - C nondecreasing",
                           [](const Sample& s) { return s.state.a - s.state.c; }, +1);
    if (std::abs(first.a - first.b) <= rel * first.a && first.c < first.b) {
      double weq = 0.0, wprod = 0.0;
      for (const Sample& s : ss) {
        weq = std::max(weq, std::abs(s.state.a - s.state.b) / s.state.a);
        wprod = std::max(wprod,
                         std::abs(s.state.a * s.state.a * s.state.c - traj.spec.product));
      }
      detail::check_bound(rep, "A = B preserved", weq, 1e-10);
      detail::check_bound(rep, "A^2 C conserved", wprod, 1e-9);
    }
    break;
  }
  case Bianchi::sl2r: {
    if (!positive)
      break;
    {
      double worst = 0.0;
      for (const Sample& s : ss)
        worst = std::max(worst, (s.state.c - s.state.b) / s.state.b);
      detail::check_bound(rep, "ordering B >= C", worst, 1e-10);
    }
    detail::check_monotone(rep, traj, "A B nondecreasing",
                           [](const Sample& s) { return s.state.a * s.state.b; }, +1);
    {
      double worst = -std::numeric_limits<double>::infinity();
      for (const Sample& s : ss) {
        const StateDerivative d = rhs(traj.spec, s.state);
        worst = std::max(worst, d.dc + 2.0 / 3.0);
      }
      detail::check_bound(rep, "dC/dt <= -2/3", worst, 1e-9);
    }
    {
      double worst = 0.0;
      for (const Sample& s : ss) {
        const double lhs = s.dlog[0] - s.dlog[1];
        const double ref = 2.0 * (s.state.a + s.state.b) * (s.state.a + s.state.c - s.state.b);
        worst = std::max(worst, std::abs(lhs - ref) / std::max(1.0, std::abs(ref)));
      }
      detail::check_bound(rep, "d ln(A/B) identity", worst, 1e-9);
    }
    {
      // both triggers absorb: once hit, the condition holds onward
      double worst1 = 0.0, worst2 = 0.0;
      bool hit1 = false, hit2 = false;
      for (const Sample& s : ss) {
        if (hit1)
          worst1 = std::max(worst1, (s.state.b - s.state.a) / s.state.a);
        if (hit2)
          worst2 = std::max(worst2, (s.state.a - (s.state.b - s.state.c)) / s.state.a);
        hit1 = hit1 || s.state.a >= s.state.b;
        hit2 = hit2 || s.state.a <= s.state.b - s.state.c;
      }
      detail::check_bound(rep, "case 1 trigger absorbing", worst1, 1e-10);
      detail::check_bound(rep, "case 2 trigger absorbing", worst2, 1e-10);
    }
    break;
  }
  case Bianchi::e2: {
    if (!positive)
      break;
    if (std::abs(first.a - first.b) <= rel * first.a) {
      double worst = 0.0;
      for (const Sample& s : ss)
        for (int i = 0; i < 3; ++i)
          worst = std::max(worst,
                           std::abs(s.state.coeffs()[i] - first.coeffs()[i]) / first.coeffs()[i]);
      detail::check_bound(rep, "flat fixed point stationary", worst, 1e-10);
      break;
    }
    detail::check_monotone(rep, traj, "A nondecreasing", A, +1);
    detail::check_monotone(rep, traj, "B nonincreasing", B, -1);
    detail::check_monotone(rep, traj, "C nonincreasing", C, -1);
    detail::check_monotone(rep, traj, "A B^2 nonincreasing",
                           [](const Sample& s) { return s.state.a * s.state.b * s.state.b; }, -1);
    break;
  }
  case Bianchi::e11: {
    if (!positive)
      break;
    detail::check_monotone(rep, traj, "B nonincreasing", B, -1);
    detail::check_monotone(rep, traj, "A / C nondecreasing",
                           [](const Sample& s) { return s.state.a / s.state.c; }, +1);
    {
      // C decays only after A >= 2C; before that it may grow
      double worst = 0.0;
      bool entered = false;
      double prev_c = 0.0;
      for (const Sample& s : ss) {
        if (entered)
          worst = std::max(worst, (s.state.c - prev_c) / prev_c);
        entered = entered || s.state.a >= 2.0 * s.state.c;
        prev_c = s.state.c;
      }
      detail::check_bound(rep, "C nonincreasing once A >= 2C", worst, 1e-10);
    }
    break;
  }
  case Bianchi::nil: {
    const int dir = positive ? +1 : -1;
    detail::check_monotone(rep, traj, positive ? "A nondecreasing" : "A nonincreasing", A, dir);
    detail::check_monotone(rep, traj, positive ? "B nonincreasing" : "B nondecreasing", B, -dir);
    detail::check_monotone(rep, traj, positive ? "C nonincreasing" : "C nondecreasing", C, -dir);
    {
      double wr = 0.0, wab = 0.0, wac = 0.0;
      const double r0 = first.b / first.c;
      const double ab0 = first.a * first.b * first.b;
      const double ac0 = first.a * first.c * first.c;
      for (const Sample& s : ss) {
        wr = std::max(wr, std::abs(s.state.b / s.state.c - r0) / r0);
        wab = std::max(wab, std::abs(s.state.a * s.state.b * s.state.b - ab0) / ab0);
        wac = std::max(wac, std::abs(s.state.a * s.state.c * s.state.c - ac0) / ac0);
      }
      detail::check_bound(rep, "B / C conserved", wr, 1e-9);
      detail::check_bound(rep, "A B^2 conserved", wab, 1e-9);
      detail::check_bound(rep, "A C^2 conserved", wac, 1e-9);
    }
    break;
  }
  }

  for (const InvariantCheck& c : rep.checks)
    rep.all_pass = rep.all_pass && c.pass;
  return rep;
}

} // namespace ricciflow

// End-to-end pipeline (canonicalize, integrate, analyze) and serialization:
// trajectory CSV with 17 significant digits and a flat summary JSON.  Output
// is byte-reproducible for identical inputs.

#pragma once

#include <array>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "ricciflow/analyze.hpp"
#include "ricciflow/integrate.hpp"
#include "ricciflow/oracle.hpp"

namespace ricciflow {

namespace detail {

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,A,B,C,K23,K31,K12,R,product_drift\n";
  for (const Sample& s : traj.samples) {
    os << detail::g17(s.state.t) << ',' << detail::g17(s.state.a) << ',' << detail::g17(s.state.b)
       << ',' << detail::g17(s.state.c) << ',' << detail::g17(s.curv.k23) << ','
       << detail::g17(s.curv.k31) << ',' << detail::g17(s.curv.k12) << ',' << detail::g17(s.curv.r)
       << ',' << detail::g17(s.product_drift) << '\n';
  }
}

struct PipelineResult {
  std::array<double, 3> initial_input{};
  Canonicalization canon;
  FlowSpec spec;
  CaseLabel case_label = CaseLabel::generic;
  Trajectory traj;
  std::optional<double> t_plus;
  std::optional<ExponentFit> fit;
  std::optional<EtaEstimate> eta;
  std::optional<SL2RClassification> sl2r;
  std::optional<SubRiemannianLimit> limit;
  InvariantReport invariants;
};

namespace detail {

inline CaseLabel static_case_label(Bianchi cls, const MetricState& s) {
  const double rel = 1e-12;
  const auto eq = [&](double x, double y) { return std::abs(x - y) <= rel * std::max(x, y); };
  switch (cls) {
  case Bianchi::su2:
    if (eq(s.a, s.b) && eq(s.b, s.c))
      return CaseLabel::fixed_point;
    if (eq(s.a, s.b))
      return CaseLabel::su2_symmetric;
    return CaseLabel::generic;
  case Bianchi::e11:
    return eq(s.a, s.c) ? CaseLabel::e11_symmetric : CaseLabel::generic;
  case Bianchi::e2:
    return eq(s.a, s.b) ? CaseLabel::fixed_point : CaseLabel::generic;
  default:
    return CaseLabel::generic;
  }
}

} // namespace detail

/// Canonicalize, integrate, and run every applicable analysis, swallowing
/// only the analysis errors that mean "not applicable here".
inline PipelineResult run_pipeline(Bianchi cls, Direction dir, std::array<double, 3> initial,
                                   Controls ctl, bool allow_swap = true) {
  PipelineResult r;
  r.initial_input = initial;
  r.canon = canonicalize(cls, initial[0], initial[1], initial[2], allow_swap);
  r.spec = FlowSpec{cls, dir, 4.0};
  const MetricState s0 = r.canon.canonical_initial;
  r.case_label = detail::static_case_label(cls, s0);

  // fixed points never move; an infinite horizon would never be reached
  if (!std::isfinite(ctl.horizon) &&
      (r.case_label == CaseLabel::fixed_point || dir == Direction::forward))
    ctl.horizon = 10.0;

  r.traj = integrate(r.spec, s0, ctl);
  r.t_plus = r.traj.t_plus_estimate;

  if (cls == Bianchi::sl2r && dir == Direction::positive) {
    r.sl2r = classify_sl2r(r.traj);
    switch (r.sl2r->label) {
    case SL2RClassification::Label::q1:
      r.case_label = CaseLabel::q1;
      break;
    case SL2RClassification::Label::q2:
      r.case_label = CaseLabel::q2;
      break;
    case SL2RClassification::Label::undetermined:
      r.case_label = CaseLabel::s0;
      break;
    }
  }

  if (r.t_plus) {
    try {
      r.fit = fit_exponents(r.traj, *r.t_plus);
    } catch (const InsufficientData&) {
    }
    if (r.fit) {
      try {
        r.eta = estimate_eta(r.traj, *r.t_plus);
      } catch (const FlowError&) {
      }
      try {
        r.limit = subriemannian_limit(r.traj, *r.t_plus, cls, r.case_label);
      } catch (const FlowError&) {
      }
    }
  }
  r.invariants = invariant_report(r.traj);
  return r;
}

/// Flat summary of one pipeline run; fields that were not produced are
/// omitted rather than nulled.
inline nlohmann::json summary_json(const PipelineResult& r) {
  nlohmann::json j;
  j["schema"] = 1;
  j["class"] = std::string(name(r.spec.cls));
  j["direction"] = std::string(name(r.spec.direction));
  j["initial"] = r.initial_input;
  j["lambda"] = r.canon.lambda;
  j["permutation"] = r.canon.permutation;
  j["case"] = std::string(name(r.case_label));
  j["terminal"] = std::string(name(r.traj.terminal));
  if (r.t_plus)
    j["t_plus"] = *r.t_plus;
  if (r.fit) {
    j["exponents"] = {{"A", r.fit->coeff[0].exponent},
                      {"B", r.fit->coeff[1].exponent},
                      {"C", r.fit->coeff[2].exponent}};
    j["prefactors"] = {{"A", r.fit->coeff[0].prefactor},
                       {"B", r.fit->coeff[1].prefactor},
                       {"C", r.fit->coeff[2].prefactor}};
    j["fit"] = {{"r_squared",
                 {{"A", r.fit->coeff[0].r_squared},
                  {"B", r.fit->coeff[1].r_squared},
                  {"C", r.fit->coeff[2].r_squared}}},
                {"window", {r.fit->window_lo, r.fit->window_hi}}};
  }
  if (r.eta) {
    j["eta"] = {{"eta1", r.eta->eta1},
                {"eta2", r.eta->eta2},
                {"eta1_interval", r.eta->interval1},
                {"eta2_interval", r.eta->interval2}};
  }
  if (r.sl2r) {
    j["sl2r_label"] = std::string(name(r.sl2r->label));
    nlohmann::json s;
    if (r.sl2r->trigger_time)
      s["trigger_time"] = *r.sl2r->trigger_time;
    s["margin"] = r.sl2r->margin;
    j["sl2r"] = s;
  }
  if (r.limit) {
    static constexpr const char* axis[3] = {"A", "B", "C"};
    j["limit"] = {{"reference", axis[r.limit->reference]},
                  {"coeffs", r.limit->limit_metric_coeffs},
                  {"dual", r.limit->dual_coeffs},
                  {"eta_ratio", r.limit->eta_ratio},
                  {"eta_ratio_interval", r.limit->eta_ratio_interval}};
  }
  j["invariants_pass"] = r.invariants.all_pass;
  return j;
}

} // namespace ricciflow

// Command implementations behind the ricciflow executable: simulate, verify,
// classify, sweep.  Kept header-only like the rest of the library so the test
// suite can drive the commands in-process.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ricciflow/report.hpp"

namespace ricciflow {

struct RunConfig {
  std::string cls;
  std::string direction = "positive";
  std::string initial;
  double horizon = std::numeric_limits<double>::quiet_NaN();  // NaN: not set
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_coeff = 1e8;
  std::string out;
  std::string summary;
  std::string config;
  std::string grid;
  std::string bisect;
  bool no_swap = false;
  bool negate_rhs = false;
};

namespace detail {

inline double parse_num(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v))
    throw InvalidInput("not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

inline std::array<double, 3> parse_triple(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 3)
    throw InvalidInput("expected A0,B0,C0 but got '" + s + "'");
  return {parse_num(parts[0]), parse_num(parts[1]), parse_num(parts[2])};
}

inline Controls controls_from(const RunConfig& cfg) {
  Controls ctl;
  ctl.rel_tol = cfg.rel_tol;
  ctl.abs_tol = cfg.abs_tol;
  ctl.max_coeff = cfg.max_coeff;
  if (!std::isnan(cfg.horizon))
    ctl.horizon = cfg.horizon;
  return ctl;
}

inline Bianchi required_class(const RunConfig& cfg) {
  if (cfg.cls.empty())
    throw InvalidInput("--class is required");
  const auto cls = parse_class(cfg.cls);
  if (!cls)
    throw InvalidInput("unknown class '" + cfg.cls + "'");
  return *cls;
}

inline Direction required_direction(const RunConfig& cfg) {
  const auto dir = parse_direction(cfg.direction);
  if (!dir)
    throw InvalidInput("unknown direction '" + cfg.direction + "'");
  return *dir;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw InvalidInput("cannot open '" + path + "' for writing");
  os << text;
}

template <class Fn>
inline void parallel_indexed(std::size_t n, Fn fn) {
  unsigned hw = std::thread::hardware_concurrency();
  unsigned nt = std::min<unsigned>(hw == 0 ? 4 : hw, 16);
  nt = static_cast<unsigned>(std::min<std::size_t>(nt, n));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (unsigned t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;)
        fn(i);
    });
  for (auto& th : pool)
    th.join();
}

inline std::string csv_opt(const std::optional<double>& v) {
  return v ? g17(*v) : std::string();
}

} // namespace detail

/// simulate: one initial datum through the full pipeline, trajectory CSV and
/// summary JSON on request, one verdict line on stdout.
inline int cmd_simulate(const RunConfig& cfg) {
  const Bianchi cls = detail::required_class(cfg);
  const Direction dir = detail::required_direction(cfg);
  if (cfg.initial.empty())
    throw InvalidInput("--initial is required");
  const auto initial = detail::parse_triple(cfg.initial);
  const Controls ctl = detail::controls_from(cfg);

  const PipelineResult r = run_pipeline(cls, dir, initial, ctl, !cfg.no_swap);

  if (!cfg.out.empty()) {
    std::ostringstream os;
    write_trajectory_csv(os, r.traj);
    detail::write_text(cfg.out, os.str());
  }
  if (!cfg.summary.empty())
    detail::write_text(cfg.summary, summary_json(r).dump(2) + "\n");

  std::ostringstream line;
  line << "class=" << name(r.spec.cls) << " direction=" << name(r.spec.direction)
       << " case=" << name(r.case_label) << " terminal=" << name(r.traj.terminal);
  if (r.t_plus)
    line << " t_plus=" << detail::g17(*r.t_plus);
  if (r.fit)
    line << " exponents=" << r.fit->coeff[0].exponent << ',' << r.fit->coeff[1].exponent << ','
         << r.fit->coeff[2].exponent;
  if (r.sl2r)
    line << " label=" << name(r.sl2r->label);
  line << " invariants=" << (r.invariants.all_pass ? "pass" : "FAIL");
  std::cout << line.str() << "\n";

  return r.traj.terminal == Terminal::step_underflow ? 3 : 0;
}

struct VerifyRow {
  std::string label;
  double worst = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Cross-checks of the analytic core against independent formulations and
/// closed-form solutions.  Returns one row per check.
inline std::vector<VerifyRow> verify_suite() {
  std::vector<VerifyRow> rows;
  const auto add = [&](const std::string& label, double worst, double tol) {
    rows.push_back({label, worst, tol, worst <= tol});
  };

  std::mt19937_64 rng(20240817u);
  std::uniform_real_distribution<double> logu(-2.0, 2.0);
  const auto random_state = [&]() {
    const double a = std::exp(logu(rng));
    const double b = std::exp(logu(rng));
    return MetricState{0.0, a, b, 4.0 / (a * b)};
  };

  {
    double worst = 0.0, worst_neg = 0.0, worst_vol = 0.0, worst_r = 0.0;
    for (Bianchi cls : all_classes) {
      for (int i = 0; i < 1000; ++i) {
        const MetricState s = random_state();
        const FlowSpec pos{cls, Direction::positive, 4.0};
        const FlowSpec fwd{cls, Direction::forward, 4.0};
        const StateDerivative dp = rhs(pos, s);
        const StateDerivative df = rhs(fwd, s);
        const StateDerivative cp = rhs_from_curvatures(pos, s);
        const StateDerivative cf = rhs_from_curvatures(fwd, s);
        const auto rel = [](double x, double y) {
          return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
        };
        worst = std::max({worst, rel(dp.da, cp.da), rel(dp.db, cp.db), rel(dp.dc, cp.dc),
                          rel(df.da, cf.da), rel(df.db, cf.db), rel(df.dc, cf.dc)});
        worst_neg = std::max({worst_neg, std::abs(dp.da + df.da), std::abs(dp.db + df.db),
                              std::abs(dp.dc + df.dc)});
        const double v = dp.da * s.b * s.c + s.a * dp.db * s.c + s.a * s.b * dp.dc;
        const double vscale = std::abs(dp.da) * s.b * s.c + s.a * std::abs(dp.db) * s.c +
                              s.a * s.b * std::abs(dp.dc);
        worst_vol = std::max(worst_vol, std::abs(v) / std::max(vscale, 1e-300));
        const Curvatures k = sectional_curvatures(cls, s);
        worst_r = std::max(worst_r, std::abs(k.r - 2.0 * (k.k23 + k.k31 + k.k12)));
      }
    }
    add("rhs matches curvature assembly", worst, 1e-12);
    add("forward is exact negation", worst_neg, 0.0);
    add("volume derivative vanishes", worst_vol, 1e-13);
    add("scalar curvature identity", worst_r, 0.0);
  }

  {
    double worst = 0.0;
    const FlowSpec pos{Bianchi::su2, Direction::positive, 4.0};
    for (int i = 0; i < 1000; ++i) {
      const MetricState s = random_state();
      const StateDerivative d = rhs(pos, s);
      const DifferenceRates dr = difference_rates(s);
      const auto rel = [](double x, double y) {
        return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
      };
      worst = std::max({worst, rel(dr.d_ab, d.da - d.db), rel(dr.d_ac, d.da - d.dc),
                        rel(dr.d_bc, d.db - d.dc)});
    }
    add("su2 difference rates consistent", worst, 1e-12);
  }

  {
    Controls ctl;
    ctl.horizon = 1.0;
    const Trajectory tr =
        integrate(FlowSpec{Bianchi::nil, Direction::forward, 4.0}, MetricState{0, 1, 2, 2}, ctl);
    double worst = 0.0;
    for (const Sample& s : tr.samples) {
      const MetricState ref = nil_solution(1, 2, 2, s.state.t);
      for (int i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(s.state.coeffs()[i] - ref.coeffs()[i]) / ref.coeffs()[i]);
    }
    add("nil closed form, forward flow", worst, 1e-8);
  }

  {
    // Near the pole the comparison amplifies time error by 1/(2 delta), so the
    // 1e-8 target at delta 1e-4 needs tolerances below the defaults.
    Controls tight;
    tight.rel_tol = 1e-12;
    tight.abs_tol = 1e-14;
    const Trajectory tr =
        integrate(FlowSpec{Bianchi::e11, Direction::positive, 4.0}, MetricState{0, 2, 1, 2}, tight);
    const double t_plus_exact = e11_symmetric_t_plus(1.0);
    double worst = 0.0;
    for (const Sample& s : tr.samples) {
      if (t_plus_exact - s.state.t < 1e-4)
        continue;
      const MetricState ref = e11_symmetric(2, 1, s.state.t);
      for (int i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(s.state.coeffs()[i] - ref.coeffs()[i]) / ref.coeffs()[i]);
    }
    add("e11 symmetric closed form", worst, 1e-8);
    const double t_hat = tr.t_plus_estimate ? *tr.t_plus_estimate
                                            : std::numeric_limits<double>::quiet_NaN();
    add("e11 symmetric blow-up time", std::abs(t_hat - t_plus_exact) / t_plus_exact, 1e-6);
  }

  {
    Controls ctl;
    ctl.horizon = 10.0;
    double worst = 0.0;
    const double r = std::cbrt(4.0);
    const struct {
      Bianchi cls;
      MetricState s0;
    } pts[] = {
        {Bianchi::su2, {0, r, r, r}},
        {Bianchi::e2, {0, 2, 2, 1}},
    };
    for (const auto& p : pts) {
      for (Direction dir : {Direction::positive, Direction::forward}) {
        const Trajectory tr = integrate(FlowSpec{p.cls, dir, 4.0}, p.s0, ctl);
        for (const Sample& s : tr.samples)
          for (int i = 0; i < 3; ++i)
            worst = std::max(worst, std::abs(s.state.coeffs()[i] - p.s0.coeffs()[i]) /
                                        p.s0.coeffs()[i]);
      }
    }
    add("fixed points stationary to horizon 10", worst, 1e-10);
  }

  {
    const double dev = scaling_check(FlowSpec{Bianchi::su2, Direction::positive, 4.0},
                                     MetricState{0, 2, 1.6, 1.25}, 0.5, 0.15);
    add("scaling covariance, su2 lambda 1/2", dev, 1e-6);
  }

  return rows;
}

/// verify: print the cross-check table; nonzero exit when anything fails.
inline int cmd_verify(const RunConfig& cfg) {
  struct Hook {
    explicit Hook(bool on) { detail::negate_polynomial_rhs = on; }
    ~Hook() { detail::negate_polynomial_rhs = false; }
  } hook(cfg.negate_rhs);

  const auto rows = verify_suite();
  std::size_t width = 0;
  for (const auto& r : rows)
    width = std::max(width, r.label.size());
  bool all = true;
  for (const auto& r : rows) {
    std::ostringstream line;
    line << (r.pass ? "PASS  " : "FAIL  ") << r.label;
    line << std::string(width - r.label.size() + 2, ' ');
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst %.3e  tol %.0e", r.worst, r.tol);
    line << buf;
    std::cout << line.str() << "\n";
    all = all && r.pass;
  }
  std::cout << (all ? "verification passed" : "verification FAILED") << "\n";
  return all ? 0 : 1;
}

namespace detail {

struct ClassifyPoint {
  std::array<double, 3> input{};
  SL2RClassification cls;
};

inline std::string classify_csv(const std::vector<ClassifyPoint>& pts) {
  std::ostringstream os;
  os << "A0,B0,C0,label,trigger_time,margin\n";
  for (const auto& p : pts) {
    os << g17(p.input[0]) << ',' << g17(p.input[1]) << ',' << g17(p.input[2]) << ','
       << name(p.cls.label) << ',' << csv_opt(p.cls.trigger_time) << ',' << g17(p.cls.margin)
       << '\n';
  }
  return os.str();
}

} // namespace detail

/// classify: label SL(2,R) initial data (single point, grid, or boundary
/// bisection along a one-parameter family).
inline int cmd_classify(const RunConfig& cfg) {
  const Controls ctl = detail::controls_from(cfg);

  if (!cfg.bisect.empty()) {
    const auto parts = detail::split(cfg.bisect, ':');
    if (parts.size() != 2 && parts.size() != 3)
      throw InvalidInput("--bisect wants A0,B0,C0:A1,B1,C1[:tol]");
    auto lo = detail::parse_triple(parts[0]);
    auto hi = detail::parse_triple(parts[1]);
    const double width = parts.size() == 3 ? detail::parse_num(parts[2]) : 1e-6;
    if (lo[0] > hi[0])
      std::swap(lo, hi);
    if (!(lo[0] < hi[0]))
      throw InvalidInput("bisection endpoints need distinct A coordinates");
    // log-linear path between the endpoints, parametrized by the A coordinate
    const InitialFamily family = [lo, hi](double x) {
      const double s = (std::log(x) - std::log(lo[0])) / (std::log(hi[0]) - std::log(lo[0]));
      const auto lerp = [s](double p, double q) { return std::exp((1 - s) * std::log(p) + s * std::log(q)); };
      return std::array<double, 3>{x, lerp(lo[1], hi[1]), lerp(lo[2], hi[2])};
    };
    const BoundaryBracket br = locate_boundary(family, lo[0], hi[0], ctl, width);
    nlohmann::json j;
    j["x_lo"] = br.x_lo;
    j["x_hi"] = br.x_hi;
    j["label_lo"] = std::string(name(br.label_lo));
    j["label_hi"] = std::string(name(br.label_hi));
    j["initial_lo"] = family(br.x_lo);
    j["initial_hi"] = family(br.x_hi);
    if (std::isfinite(br.midpoint_c_exponent))
      j["midpoint_c_exponent"] = br.midpoint_c_exponent;
    const std::string text = j.dump(2) + "\n";
    if (!cfg.summary.empty())
      detail::write_text(cfg.summary, text);
    else
      std::cout << text;
    return 0;
  }

  std::vector<std::array<double, 3>> points;
  if (!cfg.grid.empty()) {
    const auto parts = detail::split(cfg.grid, ':');
    if (parts.size() != 3)
      throw InvalidInput("--grid wants A0,B0,C0:A1,B1,C1:n");
    const auto lo = detail::parse_triple(parts[0]);
    const auto hi = detail::parse_triple(parts[1]);
    const long n = std::lround(detail::parse_num(parts[2]));
    if (n < 2)
      throw InvalidInput("grid needs at least 2 points");
    for (long i = 0; i < n; ++i) {
      const double s = double(i) / double(n - 1);
      std::array<double, 3> p;
      for (int k = 0; k < 3; ++k)
        p[k] = std::exp((1 - s) * std::log(lo[k]) + s * std::log(hi[k]));
      points.push_back(p);
    }
  } else if (!cfg.initial.empty()) {
    points.push_back(detail::parse_triple(cfg.initial));
  } else {
    throw InvalidInput("classify wants --initial, --grid, or --bisect");
  }

  std::vector<detail::ClassifyPoint> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  detail::parallel_indexed(points.size(), [&](std::size_t i) {
    try {
      const auto canon = canonicalize(Bianchi::sl2r, points[i][0], points[i][1], points[i][2],
                                      !cfg.no_swap);
      const Trajectory tr = integrate(FlowSpec{Bianchi::sl2r, Direction::positive, 4.0},
                                      canon.canonical_initial, ctl);
      results[i] = {points[i], classify_sl2r(tr)};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e)
      std::rethrow_exception(e);

  const std::string text = detail::classify_csv(results);
  if (!cfg.out.empty())
    detail::write_text(cfg.out, text);
  else
    std::cout << text;
  return 0;
}

/// sweep: pipeline over a rectangular grid of initial data, one CSV row per
/// point, errors reported per row instead of aborting the sweep.
inline int cmd_sweep(const RunConfig& cfg) {
  const Bianchi cls = detail::required_class(cfg);
  const Direction dir = detail::required_direction(cfg);
  const Controls ctl = detail::controls_from(cfg);
  if (cfg.grid.empty())
    throw InvalidInput("--grid is required, e.g. A=0.5:2:4,B=1:3:5");

  struct Axis {
    int index = -1;
    double lo = 0, hi = 0;
    long n = 0;
  };
  std::vector<Axis> axes;
  for (const std::string& part : detail::split(cfg.grid, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidInput("bad grid axis '" + part + "'");
    const std::string coeff = part.substr(0, eq);
    Axis ax;
    if (coeff == "A")
      ax.index = 0;
    else if (coeff == "B")
      ax.index = 1;
    else if (coeff == "C")
      ax.index = 2;
    else
      throw InvalidInput("grid axis must be A, B or C");
    const auto spec = detail::split(part.substr(eq + 1), ':');
    if (spec.size() != 3)
      throw InvalidInput("grid axis wants lo:hi:n");
    ax.lo = detail::parse_num(spec[0]);
    ax.hi = detail::parse_num(spec[1]);
    ax.n = std::lround(detail::parse_num(spec[2]));
    if (ax.n < 1 || ax.lo <= 0 || ax.hi <= 0)
      throw InvalidInput("bad grid axis range");
    axes.push_back(ax);
  }
  if (axes.size() != 2 || axes[0].index == axes[1].index)
    throw InvalidInput("grid wants exactly two distinct axes");
  const int free_index = 3 - axes[0].index - axes[1].index;

  const auto axis_value = [](const Axis& ax, long i) {
    return ax.n == 1 ? ax.lo : ax.lo + (ax.hi - ax.lo) * double(i) / double(ax.n - 1);
  };

  const std::size_t total = std::size_t(axes[0].n) * std::size_t(axes[1].n);
  std::vector<std::string> rows(total);
  std::atomic<std::size_t> failed{0};
  detail::parallel_indexed(total, [&](std::size_t idx) {
    const long i = long(idx) / axes[1].n;
    const long k = long(idx) % axes[1].n;
    std::array<double, 3> p{};
    p[axes[0].index] = axis_value(axes[0], i);
    p[axes[1].index] = axis_value(axes[1], k);
    p[free_index] = 4.0 / (p[axes[0].index] * p[axes[1].index]);
    std::ostringstream os;
    os << detail::g17(p[0]) << ',' << detail::g17(p[1]) << ',' << detail::g17(p[2]) << ',';
    try {
      const PipelineResult r = run_pipeline(cls, dir, p, ctl, !cfg.no_swap);
      os << name(r.case_label) << ',' << name(r.traj.terminal) << ','
         << detail::csv_opt(r.t_plus) << ',';
      if (r.fit)
        os << detail::g17(r.fit->coeff[0].exponent) << ',' << detail::g17(r.fit->coeff[1].exponent)
           << ',' << detail::g17(r.fit->coeff[2].exponent) << ','
           << detail::g17(r.fit->coeff[0].prefactor) << ','
           << detail::g17(r.fit->coeff[1].prefactor) << ','
           << detail::g17(r.fit->coeff[2].prefactor) << ',';
      else
        os << ",,,,,,";
      if (r.eta)
        os << detail::g17(r.eta->eta1) << ',' << detail::g17(r.eta->eta2) << ',';
      else
        os << ",,";
      os << (r.sl2r ? name(r.sl2r->label) : std::string_view{}) << ',';
    } catch (const std::exception& e) {
      os << ",,,,,,,,,,,,";
      std::string msg = e.what();
      for (char& ch : msg)
        if (ch == ',' || ch == '\n')
          ch = ';';
      os << msg;
      failed.fetch_add(1);
      rows[idx] = os.str();
      return;
    }
    rows[idx] = os.str();
  });

  std::ostringstream os;
  os << "A0,B0,C0,case,terminal,t_plus,exp_A,exp_B,exp_C,pre_A,pre_B,pre_C,eta1,eta2,"
        "sl2r_label,error\n";
  for (const std::string& row : rows)
    os << row << '\n';
  const std::string text = os.str();
  if (!cfg.out.empty())
    detail::write_text(cfg.out, text);
  else
    std::cout << text;
  return failed.load() == total ? 3 : 0;
}

/// Fill a RunConfig from a flat JSON object; keys mirror the long flags.
inline void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object())
    throw InvalidInput("config must be a flat JSON object");
  for (const auto& [key, val] : j.items()) {
    if (key == "class")
      cfg.cls = val.get<std::string>();
    else if (key == "direction")
      cfg.direction = val.get<std::string>();
    else if (key == "initial") {
      if (val.is_array()) {
        const auto a = val.get<std::array<double, 3>>();
        cfg.initial = detail::g17(a[0]) + "," + detail::g17(a[1]) + "," + detail::g17(a[2]);
      } else {
        cfg.initial = val.get<std::string>();
      }
    } else if (key == "horizon")
      cfg.horizon = val.get<double>();
    else if (key == "rel-tol")
      cfg.rel_tol = val.get<double>();
    else if (key == "abs-tol")
      cfg.abs_tol = val.get<double>();
    else if (key == "max-coeff")
      cfg.max_coeff = val.get<double>();
    else if (key == "out")
      cfg.out = val.get<std::string>();
    else if (key == "summary")
      cfg.summary = val.get<std::string>();
    else if (key == "grid")
      cfg.grid = val.get<std::string>();
    else if (key == "bisect")
      cfg.bisect = val.get<std::string>();
    else if (key == "no-swap")
      cfg.no_swap = val.get<bool>();
    else
      throw InvalidInput("unknown config key '" + key + "'");
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is)
    throw InvalidInput("cannot read config '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config parse error: ") + e.what());
  }
  apply_config_json(cfg, j);
}

} // namespace ricciflow

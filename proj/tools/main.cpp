// ricciflow command-line driver.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid input or usage,
// 3 integration failure.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ricciflow/ricciflow.hpp"

namespace {

// --config is applied before the regular flags so that explicit flags win.
std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0)
      return arg.substr(9);
  }
  return {};
}

void add_common_options(CLI::App* cmd, ricciflow::RunConfig& cfg) {
  cmd->add_option("--class", cfg.cls, "geometry class: su2, sl2r, e11, e2, nil");
  cmd->add_option("--direction", cfg.direction, "flow direction: positive or forward");
  cmd->add_option("--initial", cfg.initial, "initial coefficients A0,B0,C0");
  cmd->add_option("--horizon", cfg.horizon, "integration horizon (default: run to blow-up)");
  cmd->add_option("--rel-tol", cfg.rel_tol, "relative step tolerance");
  cmd->add_option("--abs-tol", cfg.abs_tol, "absolute step tolerance");
  cmd->add_option("--max-coeff", cfg.max_coeff, "blow-up ceiling on the largest coefficient");
  cmd->add_option("--out", cfg.out, "write trajectory or table CSV here");
  cmd->add_option("--summary", cfg.summary, "write summary JSON here");
  cmd->add_option("--config", cfg.config, "flat JSON config; flags override its keys");
  cmd->add_flag("--no-swap", cfg.no_swap, "reject initial data needing a bracket swap");
}

} // namespace

int main(int argc, char** argv) {
  using namespace ricciflow;

  RunConfig cfg;
  try {
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty())
      load_config_file(cfg, config_path);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"normalized Ricci flow on homogeneous 3-geometries"};
  app.require_subcommand(1);

  CLI::App* sim = app.add_subcommand("simulate", "integrate one initial datum and analyze it");
  add_common_options(sim, cfg);

  CLI::App* ver = app.add_subcommand("verify", "cross-check the analytic core");
  add_common_options(ver, cfg);
  ver->add_flag("--negate-rhs", cfg.negate_rhs)->group("");

  CLI::App* cls = app.add_subcommand("classify", "label SL(2,R) initial data");
  add_common_options(cls, cfg);
  cls->add_option("--grid", cfg.grid, "A0,B0,C0:A1,B1,C1:n log-spaced points");
  cls->add_option("--bisect", cfg.bisect, "A0,B0,C0:A1,B1,C1[:tol] boundary bisection");

  CLI::App* swp = app.add_subcommand("sweep", "pipeline over a grid of initial data");
  add_common_options(swp, cfg);
  swp->add_option("--grid", cfg.grid, "two axes, e.g. A=0.5:2:4,B=1:3:5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sim))
      return cmd_simulate(cfg);
    if (app.got_subcommand(ver))
      return cmd_verify(cfg);
    if (app.got_subcommand(cls))
      return cmd_classify(cfg);
    if (app.got_subcommand(swp))
      return cmd_sweep(cfg);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SameLabel& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FlowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

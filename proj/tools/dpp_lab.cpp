#include <iostream>

#include <CLI11.hpp>

#include "dpplab/dpplab.hpp"

using namespace dpplab;

namespace {

struct Common {
  std::string scenario;
  std::string out = "dpp-lab-out";
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  double tol = 0.0;

  RunFlags flags(const CLI::App& sub) const {
    RunFlags f;
    f.out = out;
    if (sub.count("--seed")) f.seed = seed;
    if (sub.count("--paths")) f.paths = paths;
    if (sub.count("--tol")) f.tol = tol;
    return f;
  }
};

void add_common(CLI::App* sub, Common& c, bool needs_scenario) {
  auto* s = sub->add_option("--scenario", c.scenario, "built-in name or path to a scenario JSON file");
  if (needs_scenario) s->required();
  sub->add_option("--out", c.out, "output root directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "random seed (overrides the scenario)");
  sub->add_option("--paths", c.paths, "Monte Carlo paths (overrides the scenario)")->check(CLI::PositiveNumber);
  sub->add_option("--tol", c.tol, "solver tolerance (overrides the scenario)")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpp-lab: dynamic programming principle solver, simulator and verifier"};
  app.require_subcommand(1);
  Common c;
  std::string mode;

  struct ScenarioCmd {
    const char* name;
    const char* help;
    std::vector<std::string> modes;
    CLI::App* app = nullptr;
  };
  std::vector<ScenarioCmd> cmds = {
      {"solve", "grid solver", {"dpp", "pucci-max", "pucci-min"}},
      {"simulate", "Monte Carlo walker", {"value", "exit-stats", "hitting", "drift"}},
      {"abp", "ABP-type estimates", {"continuous", "measurable", "ln-failure-demo"}},
      {"holder", "oscillation decay and De Giorgi probe", {"profile", "fit", "degiorgi"}},
  };
  for (auto& cmd : cmds) {
    cmd.app = app.add_subcommand(cmd.name, cmd.help);
    cmd.app->add_option("mode", mode, "mode")->required()->check(CLI::IsMember(cmd.modes));
    add_common(cmd.app, c, true);
  }

  CzFlags cz;
  auto* cz_cmd = app.add_subcommand("cz", "Calderón–Zygmund decomposition of random dyadic sets");
  cz_cmd->add_option("mode", mode, "mode")->required()->check(CLI::IsMember({"decompose", "fuzz"}));
  add_common(cz_cmd, c, false);
  cz_cmd->add_option("--dim", cz.dim, "dimension (1 or 2)")->capture_default_str();
  cz_cmd->add_option("--depth", cz.depth, "stopping generation L")->capture_default_str();
  cz_cmd->add_option("--resolution", cz.resolution, "generation of the cells of A (default L)");
  cz_cmd->add_option("--delta", cz.delta, "density threshold delta")->capture_default_str();
  cz_cmd->add_option("--delta-tilde", cz.delta_tilde, "last-level threshold")->capture_default_str();
  cz_cmd->add_option("--fill", cz.fill, "cell inclusion probability")->capture_default_str();

  auto* verify = app.add_subcommand("verify-all", "full acceptance battery");
  add_common(verify, c, false);

  std::string solver_out, sim_out;
  auto* compare = app.add_subcommand("compare", "solver summary.json against simulate-value summary.json");
  compare->add_option("solver_output", solver_out, "summary.json of `solve dpp`")->required();
  compare->add_option("simulator_output", sim_out, "summary.json of `simulate value`")->required();
  compare->add_option("--out", c.out, "output root directory")->capture_default_str();

  auto* list = app.add_subcommand("list", "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (list->parsed()) {
      for (const auto& n : scenario_list()) std::cout << n << "\n";
      return kExitOk;
    }
    if (compare->parsed()) return cmd_compare(solver_out, sim_out, RunFlags{c.out, {}, {}, {}});
    if (cz_cmd->parsed()) return cmd_cz(mode, cz, c.flags(*cz_cmd));
    if (verify->parsed()) {
      if (!c.scenario.empty()) std::cerr << "verify-all runs the built-in battery; --scenario is ignored\n";
      BatteryOptions o;
      if (verify->count("--seed")) o.seed = c.seed;
      if (verify->count("--paths")) o.paths = c.paths;
      bool ok = true;
      verify_all(c.out, o, [&](const CriterionLine& l) {
        std::cout << battery_line(l) << std::endl;
        ok = ok && l.pass;
      });
      return ok ? kExitOk : kExitVerification;
    }
    for (const auto& cmd : cmds) {
      if (!cmd.app->parsed()) continue;
      const auto scn = scenario_load(c.scenario);
      std::visit(
          [](const auto& s) {
            for (const auto& w : s.validate()) std::cerr << "warning: " << w << "\n";
          },
          scn);
      return run_scenario_command(cmd.name, mode, scn, c.flags(*cmd.app));
    }
  } catch (const LabError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

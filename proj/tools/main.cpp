// Command line front end: scenario simulation, parameter grids, stability
// certification and the telescope cascade, all driven by JSON scenario files.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "adrc/decomposition.hpp"
#include "adrc/scenario_io.hpp"
#include "adrc/sim.hpp"
#include "adrc/stability.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  double step_override = 0;
  double duration_override = 0;
  int parallel = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_parallel) {
  cmd->add_option("--config", args.config_path, "scenario JSON file")->required();
  cmd->add_option("--out", args.output_dir, "output directory")->required();
  cmd->add_option("--step", args.step_override, "override integration step [s]");
  cmd->add_option("--duration", args.duration_override, "override horizon [s]");
  if (with_parallel)
    cmd->add_option("--parallel", args.parallel, "worker threads for independent runs");
}

adrc::LoadedScenario load(const CommonArgs& args) {
  adrc::LoadedScenario scenario = adrc::load_scenario(args.config_path);
  if (args.step_override > 0) scenario.config.step = args.step_override;
  if (args.duration_override > 0) scenario.config.duration = args.duration_override;
  scenario.config.validate();
  std::filesystem::create_directories(args.output_dir);
  return scenario;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_simulate(const CommonArgs& args) {
  auto scenario = load(args);
  const auto result = adrc::run_scenario(scenario.config);
  adrc::write_timeseries_csv(join(args.output_dir, "timeseries.csv"), result,
                             scenario.config.plant.n());
  adrc::write_summary_json(join(args.output_dir, "summary.json"), result, scenario.config);
  return kExitOk;
}

int cmd_grid(const CommonArgs& args) {
  auto scenario = load(args);
  if (scenario.grid.T_values.empty() || scenario.grid.omega_values.empty())
    throw adrc::ConfigError("/grid", "grid command needs T_values and omega_values");
  adrc::GridBase base = adrc::make_grid_base(scenario);
  if (args.duration_override > 0) base.duration = args.duration_override;
  if (args.step_override > 0) base.step = args.step_override;
  const auto cells = adrc::run_grid(base, scenario.grid, args.parallel);
  adrc::write_grid_summary_csv(join(args.output_dir, "grid_summary.csv"), cells);
  return kExitOk;
}

int cmd_stability(const CommonArgs& args) {
  auto scenario = load(args);
  const auto problem = adrc::make_stability_problem(scenario);
  const auto base_report = adrc::evaluate_certificate(problem, scenario.config.omega,
                                                      scenario.config.kappa);
  const auto sets = adrc::feasible_sets(problem, scenario.config.omega, scenario.config.kappa,
                                        scenario.omega_grid, scenario.kappa_grid);
  adrc::write_stability_report_json(join(args.output_dir, "stability_report.json"),
                                    base_report, sets);
  adrc::write_omega_sweep_csv(join(args.output_dir, "omega_sweep.csv"), sets.omega_sweep);
  return kExitOk;
}

int cmd_telescope(const CommonArgs& args) {
  auto scenario = load(args);
  if (scenario.telescope_variants.empty())
    throw adrc::ConfigError("/telescope", "telescope command needs compensation variants");
  adrc::TelescopeConfig config{scenario.config, scenario.telescope_variants};
  const auto variants = adrc::run_telescope(config, args.parallel);
  adrc::write_telescope_summary_csv(join(args.output_dir, "telescope_summary.csv"), variants);
  for (const auto& v : variants) {
    adrc::write_timeseries_csv(
        join(args.output_dir, std::string("timeseries_") + adrc::to_string(v.mode) + ".csv"),
        v.result, scenario.config.plant.n());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ADRC cascade simulation and stability analysis"};
  app.require_subcommand(1);

  CommonArgs sim_args, grid_args, stab_args, tel_args;
  add_common(app.add_subcommand("simulate", "run one closed-loop scenario"), sim_args, false);
  add_common(app.add_subcommand("grid", "run the T x omega x rejection study"), grid_args,
             true);
  add_common(app.add_subcommand("stability", "evaluate the Lyapunov certificate"), stab_args,
             false);
  add_common(app.add_subcommand("telescope", "run the two-axis telescope scenario"), tel_args,
             true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("simulate")) return cmd_simulate(sim_args);
    if (app.got_subcommand("grid")) return cmd_grid(grid_args);
    if (app.got_subcommand("stability")) return cmd_stability(stab_args);
    if (app.got_subcommand("telescope")) return cmd_telescope(tel_args);
  } catch (const adrc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const adrc::NumericError& e) {
    std::cerr << "numeric abort at sample " << e.sample_index << ": " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

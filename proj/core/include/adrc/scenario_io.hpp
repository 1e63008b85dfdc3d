#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "adrc/sim.hpp"
#include "adrc/stability.hpp"

namespace adrc {

/// Configuration rejection; `path` holds the JSON pointer of the offending
/// field.
struct ConfigError : std::runtime_error {
  std::string path;
  ConfigError(std::string pointer, const std::string& what)
      : std::runtime_error(pointer + ": " + what), path(std::move(pointer)) {}
};

/// Everything a scenario file can describe. Sections irrelevant for a given
/// command keep their defaults.
struct LoadedScenario {
  explicit LoadedScenario(ScenarioConfig cfg) : config(std::move(cfg)) {}

  ScenarioConfig config;
  DisturbanceBounds bounds;
  Mat Qc_bar, Qo_bar;
  SweepGrid omega_grid, kappa_grid;
  GridSpec grid;
  std::vector<CompensationMode> telescope_variants;
  long seed = 0;
};

LoadedScenario load_scenario(const std::string& path);
LoadedScenario parse_scenario(const std::string& json_text);

/// Pieces derived from a loaded scenario for the other commands.
GridBase make_grid_base(const LoadedScenario& scenario);
StabilityProblem make_stability_problem(const LoadedScenario& scenario);

// Output writers. All CSV floats carry 17 significant digits; files are
// replaced atomically.
void write_timeseries_csv(const std::string& path, const ScenarioResult& result, int n);
void write_summary_json(const std::string& path, const ScenarioResult& result,
                        const ScenarioConfig& config);
void write_grid_summary_csv(const std::string& path, const std::vector<GridCell>& cells);
void write_stability_report_json(const std::string& path, const StabilityReport& base,
                                 const FeasibleSetResult& sets);
void write_omega_sweep_csv(const std::string& path,
                           const std::vector<StabilityReport>& sweep);
void write_telescope_summary_csv(const std::string& path,
                                 const std::vector<TelescopeVariantResult>& variants);

}  // namespace adrc

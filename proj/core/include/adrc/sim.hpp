#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adrc/control.hpp"
#include "adrc/model.hpp"
#include "adrc/observer.hpp"
#include "adrc/scaling.hpp"
#include "adrc/stability.hpp"
#include "adrc/types.hpp"

namespace adrc {

/// Raised when a derivative evaluation produces a non-finite value.
struct NumericError : std::runtime_error {
  std::size_t sample_index;
  NumericError(const std::string& what, std::size_t index)
      : std::runtime_error(what), sample_index(index) {}
};

enum class InputModel { first_order_lag, pi_current_loop };

const char* to_string(InputModel m);

/// PI current loop with feedforward and anti-windup, stepped with the plant:
///   u = sat(k_p i~ + v + u_r, U_m)
///   v_dot = k_i (i~ - k_s (k_p i~ + v + u_r - u))
/// The electrical stage is an ideal unit-gain first-order lag from the
/// saturated command to the current; torque = torque_constant * current.
struct CurrentLoopConfig {
  double k_p = 1.0;
  double k_i = 100.0;
  double k_s = 1.0;
  double U_m = 24.0;
  double torque_constant = 2.45;
  double electrical_time_constant = 1e-3;
  std::function<double(double)> feedforward;  // u_r(t); zero when empty

  void validate() const;
};

double saturate(double value, double limit);

struct ScenarioConfig {
  ScenarioConfig(PlantModel plant_, ReferenceTrajectory trajectory_, GainSet gains_,
                 double omega_, double kappa_)
      : plant(std::move(plant_)),
        trajectory(std::move(trajectory_)),
        gains(std::move(gains_)),
        omega(omega_),
        kappa(kappa_) {}

  PlantModel plant;
  ReferenceTrajectory trajectory;
  GainSet gains;  // raw gains driving the loop
  double omega = 1.0;  // bandwidth bookkeeping for the scaled coordinates
  double kappa = 1.0;
  CompensationMode compensation_mode = CompensationMode::none;
  bool rejection_enabled = true;
  bool open_loop = false;  // hold v = 0 (observer still runs)
  double duration = 10.0;
  double step = 1e-4;
  InputModel input_model = InputModel::first_order_lag;
  CurrentLoopConfig current_loop;
  int record_stride = 1;
  double divergence_threshold = 1e9;

  void validate() const;
};

/// Recorded closed-loop run. Signals are stored one row per recorded sample,
/// one column per axis. Metrics are accumulated at full step resolution.
struct ScenarioResult {
  std::vector<double> t;
  Mat x1, x2, u, v, h_u;
  Mat zhat1, zhat2, zhat3;
  Mat e1, e2;
  Mat ztilde1, ztilde2, ztilde3;
  Mat u_tilde;
  Mat pi_integrator;  // current-loop integrator states; zero for the lag model

  double ise = 0;
  double isc = 0;
  Vec ise_per_axis;
  bool diverged = false;
  double steady_state_sup_zeta_bar = 0;
  bool windup_warning = false;
  double saturated_fraction = 0;

  std::size_t samples() const { return t.size(); }
};

/// Trapezoid integral of the squared norm of a recorded signal.
double integral_squared(const std::vector<double>& t, const Mat& signal);

ScenarioResult run_scenario(const ScenarioConfig& config);

/// One cell of the parameter study: time constant, observer bandwidth and the
/// rejection switch, everything else shared.
struct GridCell {
  double T = 0;
  double omega = 0;
  bool rejection = false;
  double ise = 0;
  double isc = 0;
  bool diverged = false;
  double sup_zeta_bar = 0;
  StabilityReport certificate;
};

struct GridSpec {
  std::vector<double> T_values;
  std::vector<double> omega_values;
  std::vector<bool> rejection_values{true, false};
};

/// Base configuration for grid cells: normalized gains are held fixed and the
/// raw gains are re-derived per cell from its omega.
struct GridBase {
  ScaledGainSet gains;
  double kappa = 0.01;
  ReferenceTrajectory trajectory;
  double duration = 10.0;
  double step = 1e-4;
  int record_stride = 1;
  CompensationMode compensation_mode = CompensationMode::none;
  Mat B;  // plant input matrix (h == 0, q == 0 in the study)
  Mat Qc_bar, Qo_bar;
  DisturbanceBounds bounds;
};

std::vector<GridCell> run_grid(const GridBase& base, const GridSpec& spec, int parallelism = 1);

/// Telescope scenario: two-axis plant with tanh friction, ADRC position loop
/// commanding torque through PI current loops.
struct TelescopeConfig {
  ScenarioConfig scenario;           // input_model = pi_current_loop
  std::vector<CompensationMode> variants;
};

struct TelescopeVariantResult {
  CompensationMode mode;
  ScenarioResult result;
};

std::vector<TelescopeVariantResult> run_telescope(const TelescopeConfig& config,
                                                  int parallelism = 1);

/// Scaled error magnitude |zeta_bar| from raw errors at one sample.
double zeta_bar_norm(const Vec& e, const Vec& z_tilde, const Vec& u_tilde, double omega,
                     double kappa);

}  // namespace adrc

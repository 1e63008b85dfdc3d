#pragma once

#include <string>
#include <vector>

#include "adrc/sim.hpp"
#include "adrc/stability.hpp"

namespace adrc {

/// Pointwise terms of the Lyapunov derivative along a recorded run:
/// V_dot = Y1 + Y2 + Y31 + Y32 + Y4 exactly, with
///   Y1  = -1/2 w zeta_bar' Q_Y1 zeta_bar
///   Y2  =  u~' B^-1 xd_dddot
///   Y31 =  w^-2 z_bar' Po_bar C1 (h_dot - h_u_dot)
///   Y32 = -u~' B^-1 h_u_dot
///   Y4  =  w^-2 z_bar' Po_bar C1 q_dot
struct VdotSample {
  double t = 0;
  double v_numeric = 0;  // centered difference of V
  double y1 = 0, y2 = 0, y31 = 0, y32 = 0, y4 = 0;

  double sum() const { return y1 + y2 + y31 + y32 + y4; }
};

struct DecompositionCheck {
  bool available = false;
  std::string reason;       // set when unavailable
  double max_residual = 0;  // max |V_dot - sum| / (1 + |V_dot|) over interior samples
  std::vector<VdotSample> samples;
};

/// Evaluates the decomposition along a recorded scenario. Requires analytic
/// Jacobians for h1/h2 and partials for q, and the first-order-lag input
/// model (the cascade the analysis covers); otherwise reports unavailable.
DecompositionCheck vdot_decomposition_check(const ScenarioConfig& config,
                                            const ScenarioResult& result, const Mat& Qc_bar,
                                            const Mat& Qo_bar);

/// Compares the analytic control-signal derivative against a centered
/// difference of the recorded v(t). Deviations are measured as
/// |analytic - numeric| / (1 + |numeric|).
struct ControlDerivativeCheck {
  double max_relative_deviation = 0;
  std::size_t samples = 0;
};

ControlDerivativeCheck control_derivative_check(const ScenarioConfig& config,
                                                const ScenarioResult& result);

}  // namespace adrc

#include "adrc/decomposition.hpp"

#include <cmath>

namespace adrc {

namespace {

struct SampleState {
  Vec e, z_tilde, u_tilde, e_bar, z_bar;
  Vec x1, x2, u, v, h_u;
  Vec z1h, z2h;
  ReferenceTrajectory::Sample ref;
};

SampleState extract(const ScenarioConfig& cfg, const ScenarioResult& r, std::size_t k) {
  const int n = cfg.plant.n();
  const auto row = static_cast<Eigen::Index>(k);
  SampleState s;
  s.x1 = r.x1.row(row);
  s.x2 = r.x2.row(row);
  s.u = r.u.row(row);
  s.v = r.v.row(row);
  s.h_u = r.h_u.row(row);
  s.z1h = r.zhat1.row(row);
  s.z2h = r.zhat2.row(row);
  s.e.resize(2 * n);
  s.e << Vec(r.e1.row(row)), Vec(r.e2.row(row));
  s.z_tilde.resize(3 * n);
  s.z_tilde << Vec(r.ztilde1.row(row)), Vec(r.ztilde2.row(row)), Vec(r.ztilde3.row(row));
  s.u_tilde = r.u_tilde.row(row);
  s.e_bar = scale_tracking_error(s.e, cfg.omega, cfg.kappa);
  s.z_bar = scale_observation_error(s.z_tilde, cfg.omega);
  s.ref = cfg.trajectory.sample(r.t[k]);
  return s;
}

}  // namespace

DecompositionCheck vdot_decomposition_check(const ScenarioConfig& config,
                                            const ScenarioResult& result, const Mat& Qc_bar,
                                            const Mat& Qo_bar) {
  DecompositionCheck check;
  if (config.input_model != InputModel::first_order_lag) {
    check.reason = "input model is not the first-order lag the analysis covers";
    return check;
  }
  if (!config.rejection_enabled || config.open_loop) {
    check.reason = "decomposition assumes the closed loop with w_c = z3_hat";
    return check;
  }
  if (!config.plant.h1().has_jacobians() || !config.plant.h2().has_jacobians()) {
    // Zero components ship Jacobians, so this only triggers for user callables.
    check.reason = "h1/h2 lack analytic Jacobians";
    return check;
  }
  if (!config.plant.q().has_partials()) {
    check.reason = "q lacks analytic partials";
    return check;
  }
  if (result.samples() < 3) {
    check.reason = "trajectory too short";
    return check;
  }

  const int n = config.plant.n();
  const double w = config.omega;
  const ScaledSystem sys(config.gains, config.omega, config.kappa);
  const LyapunovPair pair = make_lyapunov_pair(sys, Qc_bar, Qo_bar);
  const Mat qy1 = assemble_QY1(sys, pair, config.plant.B(), config.plant.time_constants());
  const Mat poc1 = pair.Po_bar * selector_C1(n);
  const Mat& Binv = config.plant.B_inverse();

  // Lyapunov values at every sample for the centered difference.
  std::vector<double> V(result.samples());
  for (std::size_t k = 0; k < result.samples(); ++k) {
    const SampleState s = extract(config, result, k);
    V[k] = pair.lyapunov_value(s.e_bar, s.z_bar, s.u_tilde);
  }

  check.available = true;
  for (std::size_t k = 1; k + 1 < result.samples(); ++k) {
    const double t = result.t[k];
    const SampleState s = extract(config, result, k);

    VdotSample sample;
    sample.t = t;
    sample.v_numeric = (V[k + 1] - V[k - 1]) / (result.t[k + 1] - result.t[k - 1]);

    Vec zeta(6 * n);
    zeta << s.e_bar, s.z_bar, s.u_tilde;
    sample.y1 = -0.5 * w * zeta.dot(qy1 * zeta);
    sample.y2 = s.u_tilde.dot(Binv * s.ref.xd_dddot);

    // True-state rates.
    const Vec z1_dot = s.x2;
    const Vec z2_dot = config.plant.B() * s.u + config.plant.h(s.x1, s.x2, t) +
                       config.plant.q().value(s.x1, s.x2, s.u, t);
    const Vec u_dot =
        ((s.v - s.u).array() / config.plant.time_constants().array()).matrix();

    const Mat ha = config.plant.h1().jacobian_a(s.x1, s.x2, t) +
                   config.plant.h2().jacobian_a(s.x1, s.x2, t);
    const Mat hb = config.plant.h1().jacobian_b(s.x1, s.x2, t) +
                   config.plant.h2().jacobian_b(s.x1, s.x2, t);
    const Vec h_dot = ha * z1_dot + hb * z2_dot;
    const Vec h_u_dot =
        compensation_rate(config.compensation_mode, config.plant, s.ref, s.z1h, s.z2h, sys,
                          s.e_bar, s.z_bar, s.u_tilde, t);

    sample.y31 = s.z_bar.dot(poc1 * (h_dot - h_u_dot)) / (w * w);
    sample.y32 = -s.u_tilde.dot(Binv * h_u_dot);

    const auto& q = config.plant.q();
    const Vec q_dot = q.d_x1(s.x1, s.x2, s.u, t) * z1_dot +
                      q.d_x2(s.x1, s.x2, s.u, t) * z2_dot +
                      q.d_u(s.x1, s.x2, s.u, t) * u_dot + q.d_t(s.x1, s.x2, s.u, t);
    sample.y4 = s.z_bar.dot(poc1 * q_dot) / (w * w);

    const double residual =
        std::abs(sample.v_numeric - sample.sum()) / (1.0 + std::abs(sample.v_numeric));
    check.max_residual = std::max(check.max_residual, residual);
    check.samples.push_back(sample);
  }
  return check;
}

ControlDerivativeCheck control_derivative_check(const ScenarioConfig& config,
                                                const ScenarioResult& result) {
  if (result.samples() < 3)
    throw std::invalid_argument("control_derivative_check: trajectory too short");
  // The closed-form derivative encodes w_c = z3_hat in its coupling matrices.
  if (!config.rejection_enabled || config.open_loop)
    throw std::invalid_argument(
        "control_derivative_check: requires the rejecting closed loop");
  const ScaledSystem sys(config.gains, config.omega, config.kappa);

  ControlDerivativeCheck check;
  for (std::size_t k = 1; k + 1 < result.samples(); ++k) {
    const SampleState s = extract(config, result, k);
    const double t = result.t[k];

    const Vec h_u_dot =
        config.compensation_mode == CompensationMode::none
            ? Vec::Zero(config.plant.n())
            : compensation_rate(config.compensation_mode, config.plant, s.ref, s.z1h, s.z2h,
                                sys, s.e_bar, s.z_bar, s.u_tilde, t);
    const Vec analytic = control_derivative_analytic(sys, s.e_bar, s.z_bar, h_u_dot,
                                                     s.ref.xd_dddot,
                                                     config.plant.B_inverse());
    const Vec numeric = (Vec(result.v.row(static_cast<Eigen::Index>(k + 1))) -
                         Vec(result.v.row(static_cast<Eigen::Index>(k - 1)))) /
                        (result.t[k + 1] - result.t[k - 1]);
    const double dev = (analytic - numeric).norm() / (1.0 + numeric.norm());
    check.max_relative_deviation = std::max(check.max_relative_deviation, dev);
    ++check.samples;
  }
  return check;
}

}  // namespace adrc

#include "adrc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace adrc {

const char* to_string(InputModel m) {
  switch (m) {
    case InputModel::first_order_lag: return "first_order_lag";
    case InputModel::pi_current_loop: return "pi_current_loop";
  }
  return "unknown";
}

void CurrentLoopConfig::validate() const {
  if (k_p <= 0 || k_i <= 0 || k_s < 0)
    throw std::invalid_argument("current_loop: gains must be positive (k_s >= 0)");
  if (U_m <= 0) throw std::invalid_argument("current_loop: U_m must be > 0");
  if (torque_constant <= 0)
    throw std::invalid_argument("current_loop: torque_constant must be > 0");
  if (electrical_time_constant <= 0)
    throw std::invalid_argument("current_loop: electrical_time_constant must be > 0");
}

double saturate(double value, double limit) {
  return std::clamp(value, -limit, limit);
}

void ScenarioConfig::validate() const {
  if (step <= 0) throw std::invalid_argument("scenario: step must be > 0");
  if (duration < step) throw std::invalid_argument("scenario: duration must be >= step");
  if (omega <= 0 || kappa <= 0)
    throw std::invalid_argument("scenario: omega and kappa must be > 0");
  if (record_stride < 1) throw std::invalid_argument("scenario: record_stride must be >= 1");
  if (trajectory.n != plant.n())
    throw std::invalid_argument("scenario: trajectory dimension mismatch");
  gains.validate();
  if (gains.n() != plant.n()) throw std::invalid_argument("scenario: gain dimension mismatch");
  if (input_model == InputModel::first_order_lag) {
    // The integrator has to resolve the fast input pole.
    const double t_min = plant.time_constants().minCoeff();
    if (step > 1e-3 * t_min)
      throw std::invalid_argument("scenario: step must be <= 1e-3 * min(T) to resolve the "
                                  "input dynamics (step " + std::to_string(step) +
                                  ", min T " + std::to_string(t_min) + ")");
  } else {
    current_loop.validate();
  }
}

double integral_squared(const std::vector<double>& t, const Mat& signal) {
  if (t.size() != static_cast<size_t>(signal.rows()))
    throw std::invalid_argument("integral_squared: length mismatch");
  double acc = 0;
  for (size_t k = 0; k + 1 < t.size(); ++k) {
    const double a = signal.row(k).squaredNorm();
    const double b = signal.row(k + 1).squaredNorm();
    acc += 0.5 * (a + b) * (t[k + 1] - t[k]);
  }
  return acc;
}

double zeta_bar_norm(const Vec& e, const Vec& z_tilde, const Vec& u_tilde, double omega,
                     double kappa) {
  const Vec e_bar = scale_tracking_error(e, omega, kappa);
  const Vec z_bar = scale_observation_error(z_tilde, omega);
  return std::sqrt(e_bar.squaredNorm() + z_bar.squaredNorm() + u_tilde.squaredNorm());
}

namespace {

// Closed-loop right-hand side plus the derived signals needed for recording.
class ClosedLoop {
 public:
  explicit ClosedLoop(const ScenarioConfig& cfg)
      : cfg_(cfg),
        n_(cfg.plant.n()),
        observer_(cfg.gains.K1, cfg.gains.K2, cfg.gains.K3),
        controller_{cfg.gains.Kp, cfg.gains.Kd, cfg.compensation_mode,
                    cfg.rejection_enabled} {}

  int state_dim() const {
    return cfg_.input_model == InputModel::first_order_lag ? 6 * n_ : 7 * n_;
  }

  int observer_offset() const {
    return cfg_.input_model == InputModel::first_order_lag ? 3 * n_ : 4 * n_;
  }

  struct Signals {
    Vec v;         // position-loop command
    Vec h_u;       // applied compensation
    Vec u_eff;     // effective plant input (lag state or produced torque)
    bool saturated = false;
  };

  Signals signals(double t, const Vec& y) const {
    Signals s;
    const auto ref = cfg_.trajectory.sample(t);
    const auto z1h = y.segment(observer_offset(), n_);
    const auto z2h = y.segment(observer_offset() + n_, n_);
    const auto z3h = y.segment(observer_offset() + 2 * n_, n_);
    if (cfg_.open_loop) {
      s.v = Vec::Zero(n_);
      s.h_u = compensation_term(cfg_.compensation_mode, cfg_.plant, ref, z1h, z2h, t);
    } else {
      auto out = feedback(controller_, cfg_.plant, ref, z1h, z2h, z3h, t);
      s.v = std::move(out.v);
      s.h_u = std::move(out.h_u);
    }
    if (cfg_.input_model == InputModel::first_order_lag) {
      s.u_eff = y.segment(2 * n_, n_);
    } else {
      const auto current = y.segment(2 * n_, n_);
      s.u_eff = cfg_.current_loop.torque_constant * current;
      const auto vpi = y.segment(3 * n_, n_);
      const double u_r =
          cfg_.current_loop.feedforward ? cfg_.current_loop.feedforward(t) : 0.0;
      const Vec i_desired = s.v / cfg_.current_loop.torque_constant;
      const Vec i_err = i_desired - current;
      for (int i = 0; i < n_; ++i) {
        const double presat = cfg_.current_loop.k_p * i_err(i) + vpi(i) + u_r;
        if (std::abs(presat) > cfg_.current_loop.U_m) s.saturated = true;
      }
    }
    return s;
  }

  void derivative(double t, const Vec& y, Vec& dy) const {
    const auto ref = cfg_.trajectory.sample(t);
    const auto x1 = y.segment(0, n_);
    const auto x2 = y.segment(n_, n_);
    const auto z1h = y.segment(observer_offset(), n_);
    const auto z2h = y.segment(observer_offset() + n_, n_);
    const auto z3h = y.segment(observer_offset() + 2 * n_, n_);

    Vec v, h_u;
    if (cfg_.open_loop) {
      v = Vec::Zero(n_);
      h_u = compensation_term(cfg_.compensation_mode, cfg_.plant, ref, z1h, z2h, t);
    } else {
      auto out = feedback(controller_, cfg_.plant, ref, z1h, z2h, z3h, t);
      v = std::move(out.v);
      h_u = std::move(out.h_u);
    }

    dy.resize(state_dim());
    Vec u_eff;
    if (cfg_.input_model == InputModel::first_order_lag) {
      const auto u = y.segment(2 * n_, n_);
      u_eff = u;
      dy.segment(2 * n_, n_) =
          ((v - u).array() / cfg_.plant.time_constants().array()).matrix();
    } else {
      const auto& loop = cfg_.current_loop;
      const auto current = y.segment(2 * n_, n_);
      const auto vpi = y.segment(3 * n_, n_);
      const double u_r = loop.feedforward ? loop.feedforward(t) : 0.0;
      const Vec i_desired = v / loop.torque_constant;
      const Vec i_err = i_desired - current;
      for (int i = 0; i < n_; ++i) {
        const double presat = loop.k_p * i_err(i) + vpi(i) + u_r;
        const double volts = saturate(presat, loop.U_m);
        dy(3 * n_ + i) = loop.k_i * (i_err(i) - loop.k_s * (presat - volts));
        dy(2 * n_ + i) = (-current(i) + volts) / loop.electrical_time_constant;
      }
      u_eff = loop.torque_constant * current;
    }

    // Plant.
    dy.segment(0, n_) = x2;
    dy.segment(n_, n_) = cfg_.plant.B() * u_eff + cfg_.plant.h(x1, x2, t) +
                         cfg_.plant.q().value(x1, x2, u_eff, t);

    // Observer, fed by the measured position and the commanded input.
    const Vec z_hat_dot = observer_derivative(observer_, y.segment(observer_offset(), 3 * n_),
                                              x1, h_u, cfg_.plant.B() * v);
    dy.segment(observer_offset(), 3 * n_) = z_hat_dot;
  }

  const ControllerGains& controller() const { return controller_; }

 private:
  const ScenarioConfig& cfg_;
  int n_;
  ObserverGains observer_;
  ControllerGains controller_;
};

void rk4_step(const ClosedLoop& loop, double t, double h, Vec& y, Vec& k1, Vec& k2, Vec& k3,
              Vec& k4, Vec& tmp) {
  loop.derivative(t, y, k1);
  tmp = y + 0.5 * h * k1;
  loop.derivative(t + 0.5 * h, tmp, k2);
  tmp = y + 0.5 * h * k2;
  loop.derivative(t + 0.5 * h, tmp, k3);
  tmp = y + h * k3;
  loop.derivative(t + h, tmp, k4);
  y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  const int n = config.plant.n();
  const ClosedLoop loop(config);

  const auto total_steps = static_cast<std::size_t>(std::llround(config.duration / config.step));
  const std::size_t stride = static_cast<std::size_t>(config.record_stride);
  const std::size_t reserve = total_steps / stride + 2;

  ScenarioResult res;
  res.t.reserve(reserve);
  auto resize_all = [&](Eigen::Index rows) {
    for (Mat* m : {&res.x1, &res.x2, &res.u, &res.v, &res.h_u, &res.zhat1, &res.zhat2,
                   &res.zhat3, &res.e1, &res.e2, &res.ztilde1, &res.ztilde2, &res.ztilde3,
                   &res.u_tilde, &res.pi_integrator})
      m->conservativeResize(rows, n);
  };
  resize_all(static_cast<Eigen::Index>(reserve));

  Vec y = Vec::Zero(loop.state_dim());
  // x(0) = 0, u(0) = 0, z_hat(0) = (x1(0), 0, 0); everything starts at zero.

  Vec k1, k2, k3, k4, tmp;
  std::vector<double> zeta_t;
  std::vector<double> zeta_norm;
  zeta_t.reserve(total_steps + 1);
  zeta_norm.reserve(total_steps + 1);

  double ise = 0, isc = 0;
  Vec ise_axis = Vec::Zero(n);
  double prev_e1sq = 0, prev_vsq = 0;
  Vec prev_e1sq_axis = Vec::Zero(n);
  std::size_t saturated_steps = 0;
  std::size_t recorded = 0;
  bool first = true;

  auto record_sample = [&](double t, const Vec& state, const ClosedLoop::Signals& sig) {
    if (recorded >= reserve) resize_all(static_cast<Eigen::Index>(recorded + 64));
    const auto r = static_cast<Eigen::Index>(recorded);
    const auto ref = config.trajectory.sample(t);
    const auto x1 = state.segment(0, n);
    const auto x2 = state.segment(n, n);
    const auto z1h = state.segment(loop.observer_offset(), n);
    const auto z2h = state.segment(loop.observer_offset() + n, n);
    const auto z3h = state.segment(loop.observer_offset() + 2 * n, n);
    res.t.push_back(t);
    res.x1.row(r) = x1;
    res.x2.row(r) = x2;
    res.u.row(r) = sig.u_eff;
    res.v.row(r) = sig.v;
    res.h_u.row(r) = sig.h_u;
    res.zhat1.row(r) = z1h;
    res.zhat2.row(r) = z2h;
    res.zhat3.row(r) = z3h;
    res.e1.row(r) = ref.xd - x1;
    res.e2.row(r) = ref.xd_dot - x2;
    res.ztilde1.row(r) = x1 - z1h;
    res.ztilde2.row(r) = x2 - z2h;
    // True extended state z3 = q + h - h_u.
    const Vec z3 = config.plant.q().value(x1, x2, sig.u_eff, t) +
                   config.plant.h(x1, x2, t) - sig.h_u;
    res.ztilde3.row(r) = z3 - z3h;
    res.u_tilde.row(r) = sig.v - sig.u_eff;
    res.pi_integrator.row(r) = config.input_model == InputModel::pi_current_loop
                                   ? Vec(state.segment(3 * n, n)).transpose()
                                   : Vec(Vec::Zero(n)).transpose();
    ++recorded;
  };

  std::size_t step_index = 0;
  double t = 0;
  for (;; ++step_index) {
    const auto sig = loop.signals(t, y);
    if (sig.saturated) ++saturated_steps;

    // Metrics at full step resolution.
    const auto ref = config.trajectory.sample(t);
    const Vec e1 = ref.xd - y.segment(0, n);
    const Vec e2 = ref.xd_dot - y.segment(n, n);
    const double e1sq = e1.squaredNorm();
    const double vsq = sig.v.squaredNorm();
    const Vec e1sq_axis = e1.cwiseAbs2();
    if (!first) {
      ise += 0.5 * (prev_e1sq + e1sq) * config.step;
      isc += 0.5 * (prev_vsq + vsq) * config.step;
      ise_axis += 0.5 * (prev_e1sq_axis + e1sq_axis) * config.step;
    }
    prev_e1sq = e1sq;
    prev_vsq = vsq;
    prev_e1sq_axis = e1sq_axis;
    first = false;

    Vec e(2 * n), zt(3 * n);
    e << e1, e2;
    const auto z1h = y.segment(loop.observer_offset(), n);
    const auto z2h = y.segment(loop.observer_offset() + n, n);
    const auto z3h = y.segment(loop.observer_offset() + 2 * n, n);
    const Vec z3 = config.plant.q().value(y.segment(0, n), y.segment(n, n), sig.u_eff, t) +
                   config.plant.h(y.segment(0, n), y.segment(n, n), t) - sig.h_u;
    zt << y.segment(0, n) - z1h, y.segment(n, n) - z2h, z3 - z3h;
    zeta_t.push_back(t);
    zeta_norm.push_back(
        zeta_bar_norm(e, zt, sig.v - sig.u_eff, config.omega, config.kappa));

    if (step_index % stride == 0 || step_index == total_steps)
      record_sample(t, y, sig);
    if (step_index == total_steps) break;

    rk4_step(loop, t, config.step, y, k1, k2, k3, k4, tmp);
    t = config.step * static_cast<double>(step_index + 1);

    if (!y.allFinite())
      throw NumericError("non-finite state while integrating (t = " + std::to_string(t) + ")",
                         step_index + 1);
    if (y.cwiseAbs().maxCoeff() > config.divergence_threshold) {
      res.diverged = true;
      const auto sig_end = loop.signals(t, y);
      record_sample(t, y, sig_end);
      break;
    }
  }

  resize_all(static_cast<Eigen::Index>(recorded));
  res.ise = ise;
  res.isc = isc;
  res.ise_per_axis = ise_axis;
  res.saturated_fraction =
      step_index > 0 ? static_cast<double>(saturated_steps) / static_cast<double>(step_index)
                     : 0.0;
  res.windup_warning =
      config.input_model == InputModel::pi_current_loop && res.saturated_fraction > 0.5;

  // lim-sup estimate of |zeta_bar| over the final 20% of the realized horizon.
  if (!zeta_t.empty()) {
    const double t_end = zeta_t.back();
    const double t_from = 0.8 * t_end;
    double sup = 0;
    for (size_t i = 0; i < zeta_t.size(); ++i)
      if (zeta_t[i] >= t_from) sup = std::max(sup, zeta_norm[i]);
    res.steady_state_sup_zeta_bar = sup;
  }
  return res;
}

std::vector<GridCell> run_grid(const GridBase& base, const GridSpec& spec, int parallelism) {
  if (spec.T_values.empty() || spec.omega_values.empty() || spec.rejection_values.empty())
    throw std::invalid_argument("run_grid: empty grid axis");
  base.gains.validate();
  const int n = static_cast<int>(base.B.rows());

  struct CellSpec {
    double T, omega;
    bool rejection;
  };
  std::vector<CellSpec> cells;
  for (double T : spec.T_values)
    for (double w : spec.omega_values)
      for (bool rej : spec.rejection_values) cells.push_back({T, w, rej});

  std::vector<GridCell> out(cells.size());
  auto eval_cell = [&](size_t idx) {
    const auto& c = cells[idx];
    GridCell cell;
    cell.T = c.T;
    cell.omega = c.omega;
    cell.rejection = c.rejection;
    try {
      ScenarioConfig cfg(
          PlantModel(base.B, Vec::Constant(n, c.T), zero_component(n), zero_component(n),
                     zero_disturbance(n)),
          base.trajectory, unscale_gains(base.gains, c.omega, base.kappa), c.omega,
          base.kappa);
      cfg.compensation_mode = base.compensation_mode;
      cfg.rejection_enabled = c.rejection;
      cfg.duration = base.duration;
      cfg.step = base.step;
      cfg.record_stride = base.record_stride;
      const ScenarioResult r = run_scenario(cfg);
      cell.ise = r.ise;
      cell.isc = r.isc;
      cell.diverged = r.diverged;
      cell.sup_zeta_bar = r.steady_state_sup_zeta_bar;
    } catch (const NumericError&) {
      cell.diverged = true;
      cell.ise = std::numeric_limits<double>::infinity();
      cell.isc = std::numeric_limits<double>::infinity();
    }
    StabilityProblem problem{base.gains,       base.Qc_bar,
                             base.Qo_bar,      base.B,
                             Vec::Constant(n, c.T), base.bounds,
                             base.trajectory.bounds};
    cell.certificate = evaluate_certificate(problem, c.omega, base.kappa);
    out[idx] = cell;
  };

  const int workers = std::max(1, parallelism);
  if (workers == 1) {
    for (size_t i = 0; i < cells.size(); ++i) eval_cell(i);
  } else {
    std::vector<std::future<void>> futures;
    std::atomic<size_t> next{0};
    for (int wkr = 0; wkr < workers; ++wkr) {
      futures.push_back(std::async(std::launch::async, [&] {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
          eval_cell(i);
      }));
    }
    for (auto& f : futures) f.get();
  }
  return out;
}

std::vector<TelescopeVariantResult> run_telescope(const TelescopeConfig& config,
                                                  int parallelism) {
  if (config.scenario.input_model != InputModel::pi_current_loop)
    throw std::invalid_argument("run_telescope: input_model must be pi_current_loop");
  if (config.variants.empty())
    throw std::invalid_argument("run_telescope: no compensation variants");

  std::vector<TelescopeVariantResult> out(config.variants.size());
  auto eval_variant = [&](size_t idx) {
    ScenarioConfig cfg = config.scenario;
    cfg.compensation_mode = config.variants[idx];
    out[idx] = TelescopeVariantResult{config.variants[idx], run_scenario(cfg)};
  };
  const int workers = std::max(1, parallelism);
  if (workers == 1) {
    for (size_t i = 0; i < out.size(); ++i) eval_variant(i);
  } else {
    std::vector<std::future<void>> futures;
    std::atomic<size_t> next{0};
    for (int wkr = 0; wkr < workers; ++wkr) {
      futures.push_back(std::async(std::launch::async, [&] {
        for (size_t i = next.fetch_add(1); i < out.size(); i = next.fetch_add(1))
          eval_variant(i);
      }));
    }
    for (auto& f : futures) f.get();
  }
  return out;
}

}  // namespace adrc

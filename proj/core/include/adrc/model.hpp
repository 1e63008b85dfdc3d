#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "adrc/types.hpp"

namespace adrc {

/// Piecewise-constant coefficient schedule keyed by time. The entry with the
/// largest time <= t is active; before the first entry the first value holds.
struct Schedule {
  std::vector<std::pair<double, double>> steps;  // (time, value), sorted by time

  static Schedule constant(double value) { return Schedule{{{0.0, value}}}; }
  double at(double t) const;
};

/// One component of the known dynamics h = h1 + h2, evaluated as h_i(a, b)
/// where `a` is position-like and `b` velocity-like. Components may carry
/// scheduled coefficients, hence the time argument; the stability analysis
/// treats them as functions of (a, b) alone, so schedules must be constant
/// over any window where derivative identities are checked.
struct DynamicsComponent {
  std::function<Vec(const Vec& a, const Vec& b, double t)> value;
  std::function<Mat(const Vec& a, const Vec& b, double t)> jacobian_a;  // d/da, optional
  std::function<Mat(const Vec& a, const Vec& b, double t)> jacobian_b;  // d/db, optional

  bool has_jacobians() const {
    return static_cast<bool>(jacobian_a) && static_cast<bool>(jacobian_b);
  }
};

DynamicsComponent zero_component(int n);

/// Coulomb-like friction acting on the velocity argument:
/// per axis, f_c(t) * tanh(f_t * b_i). Ships analytic Jacobians.
DynamicsComponent tanh_friction(Schedule f_c, double f_t);

/// Unknown disturbance q(x1, x2, u, t) with optional analytic partials.
struct Disturbance {
  std::function<Vec(const Vec& x1, const Vec& x2, const Vec& u, double t)> value;
  std::function<Mat(const Vec&, const Vec&, const Vec&, double)> d_x1;
  std::function<Mat(const Vec&, const Vec&, const Vec&, double)> d_x2;
  std::function<Mat(const Vec&, const Vec&, const Vec&, double)> d_u;
  std::function<Vec(const Vec&, const Vec&, const Vec&, double)> d_t;

  bool has_partials() const {
    return d_x1 && d_x2 && d_u && d_t;
  }
};

Disturbance zero_disturbance(int n);
Disturbance constant_disturbance(Vec offset);
/// q(t) = amplitude * sin(angular_frequency * t), state-independent.
Disturbance sine_time_disturbance(Vec amplitude, double angular_frequency);
/// Difference between the actual friction and the modelled one, both of the
/// f_c tanh(f_t x2) family. Represents a miscalibrated friction coefficient:
/// q = actual_fc(t) tanh(actual_ft x2) - modelled_fc(t) tanh(modelled_ft x2).
Disturbance friction_mismatch_disturbance(Schedule actual_fc, double actual_ft,
                                          Schedule modelled_fc, double modelled_ft, int n);

/// Second-order fully actuated plant
///   x1_dot = x2
///   x2_dot = B u + h1(x1,x2) + h2(x1,x2) + q(x1,x2,u,t)
/// driven through first-order input dynamics u_dot = T^-1 (-u + v).
class PlantModel {
 public:
  PlantModel(Mat B, Vec time_constants, DynamicsComponent h1, DynamicsComponent h2,
             Disturbance q);

  int n() const { return n_; }
  const Mat& B() const { return B_; }
  const Mat& B_inverse() const { return B_inv_; }
  /// Diagonal entries of T.
  const Vec& time_constants() const { return time_constants_; }
  const DynamicsComponent& h1() const { return h1_; }
  const DynamicsComponent& h2() const { return h2_; }
  const Disturbance& q() const { return q_; }

  Vec h(const Vec& x1, const Vec& x2, double t) const;

 private:
  int n_;
  Mat B_;
  Mat B_inv_;
  Vec time_constants_;
  DynamicsComponent h1_, h2_;
  Disturbance q_;
};

struct PlantDerivative {
  Vec x1_dot, x2_dot, u_dot;
};

PlantDerivative plant_derivative(const PlantModel& model, const Vec& x1, const Vec& x2,
                                 const Vec& u, const Vec& v, double t);

/// Stacked tracking error e = [xd - x1; xd_dot - x2].
Vec tracking_error(const Vec& xd, const Vec& xd_dot, const Vec& x1, const Vec& x2);

/// Reference trajectory with closed-form derivatives up to the jerk, plus
/// declared norm bounds for xd .. xd_dddot.
struct ReferenceTrajectory {
  int n = 0;
  std::function<Vec(double)> position;
  std::function<Vec(double)> velocity;
  std::function<Vec(double)> acceleration;
  std::function<Vec(double)> jerk;
  std::array<double, 4> bounds{};  // x_b0 .. x_b3

  struct Sample {
    Vec xd, xd_dot, xd_ddot, xd_dddot;
  };
  Sample sample(double t) const {
    return Sample{position(t), velocity(t), acceleration(t), jerk(t)};
  }
};

/// amplitude * sin(angular_frequency * t) on every axis; bounds are
/// amplitude * angular_frequency^k.
ReferenceTrajectory sine_reference(double amplitude, double angular_frequency, int n);
ReferenceTrajectory zero_reference(int n);

/// Bounds on the partial derivatives of h1, h2 and q.
struct DisturbanceBounds {
  double h1a = 0, h1b = 0, h2a = 0, h2b = 0;
  double q_z1 = 0, q_z2 = 0, q_u = 0, q_t = 0;

  void validate() const;  // throws std::invalid_argument on negative/non-finite
};

/// Sampled check that declared bounds dominate the actual partial derivatives
/// over a box around the origin. Analytic Jacobians are used when available,
/// otherwise central finite differences with step 1e-6.
struct BoundCheck {
  bool ok = true;
  double worst_excess = 0;  // max over samples of (norm - bound)
  std::string worst_term;
};

BoundCheck check_bounds_dominate(const PlantModel& model, const DisturbanceBounds& bounds,
                                 double state_radius, double input_radius, double t_max,
                                 int samples, unsigned seed);

}  // namespace adrc

#include "adrc/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace adrc {

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double max_abs(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

double Schedule::at(double t) const {
  if (steps.empty()) throw std::invalid_argument("Schedule: empty");
  double value = steps.front().second;
  for (const auto& [time, v] : steps) {
    if (time <= t) value = v;
    else break;
  }
  return value;
}

DynamicsComponent zero_component(int n) {
  DynamicsComponent c;
  c.value = [n](const Vec&, const Vec&, double) { return Vec::Zero(n).eval(); };
  c.jacobian_a = [n](const Vec&, const Vec&, double) { return Mat::Zero(n, n).eval(); };
  c.jacobian_b = [n](const Vec&, const Vec&, double) { return Mat::Zero(n, n).eval(); };
  return c;
}

DynamicsComponent tanh_friction(Schedule f_c, double f_t) {
  DynamicsComponent c;
  c.value = [f_c, f_t](const Vec&, const Vec& b, double t) {
    const double fc = f_c.at(t);
    return (fc * (f_t * b.array()).tanh()).matrix().eval();
  };
  c.jacobian_a = [](const Vec& a, const Vec&, double) {
    return Mat::Zero(a.size(), a.size()).eval();
  };
  c.jacobian_b = [f_c, f_t](const Vec&, const Vec& b, double t) {
    const double fc = f_c.at(t);
    Vec th = (f_t * b.array()).tanh();
    Vec diag = fc * f_t * (1.0 - th.array().square());
    return Mat(diag.asDiagonal());
  };
  return c;
}

Disturbance zero_disturbance(int n) {
  Disturbance d;
  d.value = [n](const Vec&, const Vec&, const Vec&, double) { return Vec::Zero(n).eval(); };
  d.d_x1 = [n](const Vec&, const Vec&, const Vec&, double) { return Mat::Zero(n, n).eval(); };
  d.d_x2 = d.d_x1;
  d.d_u = d.d_x1;
  d.d_t = [n](const Vec&, const Vec&, const Vec&, double) { return Vec::Zero(n).eval(); };
  return d;
}

Disturbance constant_disturbance(Vec offset) {
  const int n = static_cast<int>(offset.size());
  Disturbance d = zero_disturbance(n);
  d.value = [offset](const Vec&, const Vec&, const Vec&, double) { return offset; };
  return d;
}

Disturbance sine_time_disturbance(Vec amplitude, double angular_frequency) {
  const int n = static_cast<int>(amplitude.size());
  Disturbance d = zero_disturbance(n);
  d.value = [amplitude, angular_frequency](const Vec&, const Vec&, const Vec&, double t) {
    return (amplitude * std::sin(angular_frequency * t)).eval();
  };
  d.d_t = [amplitude, angular_frequency](const Vec&, const Vec&, const Vec&, double t) {
    return (amplitude * angular_frequency * std::cos(angular_frequency * t)).eval();
  };
  return d;
}

Disturbance friction_mismatch_disturbance(Schedule actual_fc, double actual_ft,
                                          Schedule modelled_fc, double modelled_ft, int n) {
  Disturbance d = zero_disturbance(n);
  d.value = [=](const Vec&, const Vec& x2, const Vec&, double t) {
    Vec actual = (actual_fc.at(t) * (actual_ft * x2.array()).tanh()).matrix();
    Vec modelled = (modelled_fc.at(t) * (modelled_ft * x2.array()).tanh()).matrix();
    return (actual - modelled).eval();
  };
  d.d_x2 = [=](const Vec&, const Vec& x2, const Vec&, double t) {
    Vec sa = actual_fc.at(t) * actual_ft * (1.0 - (actual_ft * x2.array()).tanh().square());
    Vec sm =
        modelled_fc.at(t) * modelled_ft * (1.0 - (modelled_ft * x2.array()).tanh().square());
    return Mat((sa - sm).asDiagonal());
  };
  return d;
}

PlantModel::PlantModel(Mat B, Vec time_constants, DynamicsComponent h1, DynamicsComponent h2,
                       Disturbance q)
    : n_(static_cast<int>(B.rows())),
      B_(std::move(B)),
      time_constants_(std::move(time_constants)),
      h1_(std::move(h1)),
      h2_(std::move(h2)),
      q_(std::move(q)) {
  if (B_.rows() != B_.cols()) throw std::invalid_argument("PlantModel: B must be square");
  if (time_constants_.size() != n_)
    throw std::invalid_argument("PlantModel: T diagonal size must match B");
  if ((time_constants_.array() <= 0.0).any())
    throw std::invalid_argument("PlantModel: T entries must be strictly positive");
  Eigen::JacobiSVD<Mat> svd(B_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues()(n_ - 1);
  const double smax = svd.singularValues()(0);
  if (!(smin > 1e-12 * smax))
    throw std::invalid_argument("PlantModel: B is singular (smallest singular value " +
                                std::to_string(smin) + ")");
  B_inv_ = svd.solve(Mat::Identity(n_, n_));
  if (!h1_.value || !h2_.value || !q_.value)
    throw std::invalid_argument("PlantModel: h1, h2 and q must be callable");
}

Vec PlantModel::h(const Vec& x1, const Vec& x2, double t) const {
  return h1_.value(x1, x2, t) + h2_.value(x1, x2, t);
}

namespace {
void require_dim(const Vec& v, int n, const char* name) {
  if (v.size() != n)
    throw std::invalid_argument(std::string("dimension mismatch for ") + name);
}
}  // namespace

PlantDerivative plant_derivative(const PlantModel& model, const Vec& x1, const Vec& x2,
                                 const Vec& u, const Vec& v, double t) {
  const int n = model.n();
  require_dim(x1, n, "x1");
  require_dim(x2, n, "x2");
  require_dim(u, n, "u");
  require_dim(v, n, "v");
  PlantDerivative d;
  d.x1_dot = x2;
  d.x2_dot = model.B() * u + model.h(x1, x2, t) + model.q().value(x1, x2, u, t);
  d.u_dot = ((v - u).array() / model.time_constants().array()).matrix();
  return d;
}

Vec tracking_error(const Vec& xd, const Vec& xd_dot, const Vec& x1, const Vec& x2) {
  if (xd.size() != x1.size() || xd_dot.size() != x2.size() || xd.size() != xd_dot.size())
    throw std::invalid_argument("tracking_error: dimension mismatch");
  Vec e(2 * xd.size());
  e << xd - x1, xd_dot - x2;
  return e;
}

ReferenceTrajectory sine_reference(double amplitude, double angular_frequency, int n) {
  if (amplitude < 0) throw std::invalid_argument("sine_reference: amplitude must be >= 0");
  if (angular_frequency <= 0)
    throw std::invalid_argument("sine_reference: angular_frequency must be > 0");
  ReferenceTrajectory traj;
  traj.n = n;
  const double a = amplitude, w = angular_frequency;
  traj.position = [a, w, n](double t) { return (a * std::sin(w * t) * Vec::Ones(n)).eval(); };
  traj.velocity = [a, w, n](double t) {
    return (a * w * std::cos(w * t) * Vec::Ones(n)).eval();
  };
  traj.acceleration = [a, w, n](double t) {
    return (-a * w * w * std::sin(w * t) * Vec::Ones(n)).eval();
  };
  traj.jerk = [a, w, n](double t) {
    return (-a * w * w * w * std::cos(w * t) * Vec::Ones(n)).eval();
  };
  // Per-axis amplitude bounds; vector norms add a sqrt(n) factor.
  const double root_n = std::sqrt(static_cast<double>(n));
  for (int k = 0; k < 4; ++k) traj.bounds[static_cast<size_t>(k)] = root_n * a * std::pow(w, k);
  return traj;
}

ReferenceTrajectory zero_reference(int n) {
  ReferenceTrajectory traj;
  traj.n = n;
  auto zero = [n](double) { return Vec::Zero(n).eval(); };
  traj.position = zero;
  traj.velocity = zero;
  traj.acceleration = zero;
  traj.jerk = zero;
  traj.bounds = {0, 0, 0, 0};
  return traj;
}

void DisturbanceBounds::validate() const {
  for (double b : {h1a, h1b, h2a, h2b, q_z1, q_z2, q_u, q_t}) {
    if (!(b >= 0) || !std::isfinite(b))
      throw std::invalid_argument("DisturbanceBounds: entries must be finite and >= 0");
  }
}

namespace {

// Central finite-difference Jacobian of f w.r.t. one vector argument.
template <typename F>
Mat fd_jacobian(const F& f, const Vec& x0, int out_dim, double step = 1e-6) {
  const int n = static_cast<int>(x0.size());
  Mat jac(out_dim, n);
  Vec xp = x0, xm = x0;
  for (int j = 0; j < n; ++j) {
    xp(j) = x0(j) + step;
    xm(j) = x0(j) - step;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * step);
    xp(j) = x0(j);
    xm(j) = x0(j);
  }
  return jac;
}

}  // namespace

BoundCheck check_bounds_dominate(const PlantModel& model, const DisturbanceBounds& bounds,
                                 double state_radius, double input_radius, double t_max,
                                 int samples, unsigned seed) {
  bounds.validate();
  const int n = model.n();
  std::mt19937 rng(seed);
  // Log-uniform magnitudes with random signs: saturating nonlinearities hit
  // their worst-case slopes near the origin, which uniform sampling misses.
  std::uniform_real_distribution<double> mag(std::log(1e-6), std::log(1.0));
  std::uniform_real_distribution<double> sign(0.0, 1.0);
  std::uniform_real_distribution<double> ut(0.0, t_max);
  auto draw = [&](double radius) {
    const double m = radius * std::exp(mag(rng));
    return sign(rng) < 0.5 ? -m : m;
  };
  auto us = [&] { return draw(state_radius); };
  auto uu = [&] { return draw(input_radius); };

  BoundCheck result;
  const double fd_tol = 1e-6;

  auto record = [&](double norm, double bound, const char* term) {
    const double excess = norm - (bound + fd_tol);
    if (excess > result.worst_excess) {
      result.worst_excess = excess;
      result.worst_term = term;
      result.ok = false;
    }
  };

  for (int s = 0; s < samples; ++s) {
    Vec x1(n), x2(n), u(n);
    for (int i = 0; i < n; ++i) {
      x1(i) = us();
      x2(i) = us();
      u(i) = uu();
    }
    const double t = ut(rng);

    auto component_norms = [&](const DynamicsComponent& c, double ba, double bb,
                               const char* na, const char* nb) {
      Mat ja, jb;
      if (c.has_jacobians()) {
        ja = c.jacobian_a(x1, x2, t);
        jb = c.jacobian_b(x1, x2, t);
      } else {
        ja = fd_jacobian([&](const Vec& a) { return c.value(a, x2, t); }, x1, n);
        jb = fd_jacobian([&](const Vec& b) { return c.value(x1, b, t); }, x2, n);
      }
      record(spectral_norm(ja), ba, na);
      record(spectral_norm(jb), bb, nb);
    };
    component_norms(model.h1(), bounds.h1a, bounds.h1b, "h1a", "h1b");
    component_norms(model.h2(), bounds.h2a, bounds.h2b, "h2a", "h2b");

    const Disturbance& q = model.q();
    Mat j1, j2, ju;
    Vec jt;
    if (q.has_partials()) {
      j1 = q.d_x1(x1, x2, u, t);
      j2 = q.d_x2(x1, x2, u, t);
      ju = q.d_u(x1, x2, u, t);
      jt = q.d_t(x1, x2, u, t);
    } else {
      j1 = fd_jacobian([&](const Vec& a) { return q.value(a, x2, u, t); }, x1, n);
      j2 = fd_jacobian([&](const Vec& b) { return q.value(x1, b, u, t); }, x2, n);
      ju = fd_jacobian([&](const Vec& w) { return q.value(x1, x2, w, t); }, u, n);
      const double step = 1e-6;
      jt = (q.value(x1, x2, u, t + step) - q.value(x1, x2, u, t - step)) / (2.0 * step);
    }
    record(spectral_norm(j1), bounds.q_z1, "q_z1");
    record(spectral_norm(j2), bounds.q_z2, "q_z2");
    record(spectral_norm(ju), bounds.q_u, "q_u");
    record(jt.norm(), bounds.q_t, "q_t");
  }
  return result;
}

}  // namespace adrc

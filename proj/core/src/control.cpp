#include "adrc/control.hpp"

#include <stdexcept>

namespace adrc {

const char* to_string(CompensationMode mode) {
  switch (mode) {
    case CompensationMode::none: return "none";
    case CompensationMode::reference_based: return "reference_based";
    case CompensationMode::estimate_based: return "estimate_based";
  }
  return "unknown";
}

void ControllerGains::validate() const {
  if (Kp.size() == 0 || Kp.size() != Kd.size())
    throw std::invalid_argument("ControllerGains: Kp/Kd sizes inconsistent");
  if ((Kp.array() <= 0).any() || (Kd.array() <= 0).any())
    throw std::invalid_argument("ControllerGains: gains must be strictly positive");
}

Vec compensation_term(CompensationMode mode, const PlantModel& model,
                      const ReferenceTrajectory::Sample& ref, const Vec& z1_hat,
                      const Vec& z2_hat, double t) {
  switch (mode) {
    case CompensationMode::none:
      return Vec::Zero(model.n());
    case CompensationMode::reference_based:
      return model.h1().value(ref.xd, ref.xd_dot, t) + model.h2().value(ref.xd, ref.xd_dot, t);
    case CompensationMode::estimate_based:
      return model.h1().value(z1_hat, z2_hat, t) + model.h2().value(ref.xd, ref.xd_dot, t);
  }
  throw std::logic_error("compensation_term: bad mode");
}

ControlOutput feedback(const ControllerGains& gains, const PlantModel& model,
                       const ReferenceTrajectory::Sample& ref, const Vec& z1_hat,
                       const Vec& z2_hat, const Vec& z3_hat, double t) {
  const int n = model.n();
  if (z1_hat.size() != n || z2_hat.size() != n || z3_hat.size() != n)
    throw std::invalid_argument("feedback: estimate dimension mismatch");
  ControlOutput out;
  out.h_u = compensation_term(gains.compensation_mode, model, ref, z1_hat, z2_hat, t);
  const Vec w_c = gains.rejection_enabled ? z3_hat : Vec::Zero(n).eval();
  out.v = model.B_inverse() * (gains.Kp.cwiseProduct(ref.xd - z1_hat) +
                               gains.Kd.cwiseProduct(ref.xd_dot - z2_hat) - out.h_u +
                               ref.xd_ddot - w_c);
  return out;
}

Vec control_derivative_analytic(const ScaledSystem& sys, const Vec& e_bar, const Vec& z_bar,
                                const Vec& h_u_dot, const Vec& xd_dddot,
                                const Mat& B_inverse) {
  const int n = sys.n();
  if (e_bar.size() != 2 * n || z_bar.size() != 3 * n || h_u_dot.size() != n ||
      xd_dddot.size() != n)
    throw std::invalid_argument("control_derivative_analytic: dimension mismatch");
  const double w = sys.omega();
  const double k = sys.kappa();
  const Vec d3k = delta_diagonal(3, k, n);

  const Vec from_e = (k * k * k) * (sys.Kc_bar() * (sys.Hc_bar() * e_bar));
  const Vec from_z = k * (sys.Kc_bar() * (sys.W1_bar() * (d3k.asDiagonal() * z_bar))) +
                     sys.W2_bar() * (d3k.asDiagonal() * (sys.Ho_bar() * z_bar));
  return B_inverse * ((w * w * w) * (from_e + from_z) - h_u_dot + xd_dddot);
}

Vec compensation_rate(CompensationMode mode, const PlantModel& model,
                      const ReferenceTrajectory::Sample& ref, const Vec& z1_hat,
                      const Vec& z2_hat, const ScaledSystem& sys, const Vec& e_bar,
                      const Vec& z_bar, const Vec& u_tilde, double t) {
  const int n = model.n();
  if (mode == CompensationMode::none) return Vec::Zero(n);
  if (!model.h1().has_jacobians() || !model.h2().has_jacobians())
    throw std::invalid_argument("compensation_rate: analytic Jacobians required");

  const Mat h2a_ref = model.h2().jacobian_a(ref.xd, ref.xd_dot, t);
  const Mat h2b_ref = model.h2().jacobian_b(ref.xd, ref.xd_dot, t);

  if (mode == CompensationMode::reference_based) {
    const Mat h1a_ref = model.h1().jacobian_a(ref.xd, ref.xd_dot, t);
    const Mat h1b_ref = model.h1().jacobian_b(ref.xd, ref.xd_dot, t);
    return (h1a_ref + h2a_ref) * ref.xd_dot + (h1b_ref + h2b_ref) * ref.xd_ddot;
  }

  // Estimate-based compensation h1(z1_hat, z2_hat) + h2(xd, xd_dot): the rate
  // follows the chain rule through the scaled error dynamics. The z3_dot
  // column of the observation part carries a zero Jacobian block, so the
  // scaled derivatives can be formed with z3_dot = 0.
  const Mat h1a_hat = model.h1().jacobian_a(z1_hat, z2_hat, t);
  const Mat h1b_hat = model.h1().jacobian_b(z1_hat, z2_hat, t);
  const double w = sys.omega();
  const double kw = sys.kappa() * w;

  const auto d = scaled_error_derivatives(sys, e_bar, z_bar, u_tilde, Vec::Zero(n), model.B());

  Mat w_h4(n, 2 * n);
  w_h4 << h2a_ref + h1a_hat, h2b_ref + h1b_hat;
  Mat w_h5(n, 2 * n);
  w_h5 << h1a_hat, kw * h1b_hat;
  Mat w_h6(n, 3 * n);
  w_h6 << h1a_hat, w * h1b_hat, Mat::Zero(n, n);

  Vec ref_rate(2 * n);
  ref_rate << ref.xd_dot, ref.xd_ddot;
  return w_h4 * ref_rate - w_h5 * d.e_bar_dot - w_h6 * d.z_bar_dot;
}

}  // namespace adrc

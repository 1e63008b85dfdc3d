#pragma once

#include "adrc/model.hpp"
#include "adrc/scaling.hpp"
#include "adrc/types.hpp"

namespace adrc {

enum class CompensationMode { none, reference_based, estimate_based };

const char* to_string(CompensationMode mode);

/// Feedback gains and switches of the preliminary control law.
struct ControllerGains {
  Vec Kp, Kd;  // diagonal entries, strictly positive
  CompensationMode compensation_mode = CompensationMode::none;
  bool rejection_enabled = true;

  void validate() const;
};

struct ControlOutput {
  Vec v;    // commanded input
  Vec h_u;  // compensation term actually applied
};

/// Compensation term h_u for the given mode:
///   none            -> 0
///   reference_based -> h1(xd, xd_dot) + h2(xd, xd_dot)
///   estimate_based  -> h1(z1_hat, z2_hat) + h2(xd, xd_dot)
Vec compensation_term(CompensationMode mode, const PlantModel& model,
                      const ReferenceTrajectory::Sample& ref, const Vec& z1_hat,
                      const Vec& z2_hat, double t);

/// v = B^-1 (Kp (xd - z1_hat) + Kd (xd_dot - z2_hat) - h_u + xd_ddot - w_c),
/// with w_c = z3_hat when rejection is enabled, else 0.
ControlOutput feedback(const ControllerGains& gains, const PlantModel& model,
                       const ReferenceTrajectory::Sample& ref, const Vec& z1_hat,
                       const Vec& z2_hat, const Vec& z3_hat, double t);

/// Analytic derivative of the control signal in scaled error coordinates:
/// v_dot = B^-1 ( w^3 (k^3 Kc_bar Hc_bar e_bar
///                     + (k Kc_bar W1_bar D3(k) + W2_bar D3(k) Ho_bar) z_bar)
///               - h_u_dot + xd_dddot ).
Vec control_derivative_analytic(const ScaledSystem& sys, const Vec& e_bar, const Vec& z_bar,
                                const Vec& h_u_dot, const Vec& xd_dddot,
                                const Mat& B_inverse);

/// Exact rate of the compensation term along the closed loop, from the chain
/// rule. Requires analytic Jacobians on h1 and h2. Evaluation points follow
/// the compensation definition (h1 at the estimates or the reference, h2 at
/// the reference). The estimate-based rate needs the scaled error derivatives;
/// their z3_dot contribution cancels structurally, so it is not required.
Vec compensation_rate(CompensationMode mode, const PlantModel& model,
                      const ReferenceTrajectory::Sample& ref, const Vec& z1_hat,
                      const Vec& z2_hat, const ScaledSystem& sys, const Vec& e_bar,
                      const Vec& z_bar, const Vec& u_tilde, double t);

}  // namespace adrc

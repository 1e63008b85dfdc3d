#pragma once

#include "adrc/scaling.hpp"
#include "adrc/types.hpp"

namespace adrc {

/// Extended state observer gains (diagonal entries). Construction rejects a
/// gain set whose induced H_o is not Hurwitz.
class ObserverGains {
 public:
  ObserverGains(Vec k1, Vec k2, Vec k3);

  int n() const { return static_cast<int>(k1_.size()); }
  const Vec& k1() const { return k1_; }
  const Vec& k2() const { return k2_; }
  const Vec& k3() const { return k3_; }

  /// 3n x 3n block matrix [-K1 I 0; -K2 0 I; -K3 0 0].
  Mat Ho() const { return build_Ho(k1_, k2_, k3_); }

 private:
  Vec k1_, k2_, k3_;
};

/// Luenberger-like ESO update:
///   z1_hat_dot = K1 (z1 - z1_hat) + z2_hat
///   z2_hat_dot = K2 (z1 - z1_hat) + z3_hat + h_u + B v
///   z3_hat_dot = K3 (z1 - z1_hat)
/// `Bv` is the already multiplied input term.
Vec observer_derivative(const ObserverGains& gains, const Vec& z_hat, const Vec& z1_measured,
                        const Vec& h_u, const Vec& Bv);

/// Observation error dynamics Ho z_tilde + C0 (B u_tilde) + C1 z3_dot.
Vec observation_error_derivative(const Mat& Ho, const Vec& z_tilde, const Vec& Bu_tilde,
                                 const Vec& z3_dot);

}  // namespace adrc

#pragma once

#include "adrc/types.hpp"

namespace adrc {

/// Bandwidth-scaling operator Delta_m(alpha) = diag(alpha^{m-1} I, ..., I).
Mat delta(int m, double alpha, int n);
/// Diagonal of delta() as a vector (cheaper to apply).
Vec delta_diagonal(int m, double alpha, int n);

/// Raw controller/observer gains, stored as diagonal entries.
struct GainSet {
  Vec Kp, Kd, K1, K2, K3;

  int n() const { return static_cast<int>(Kp.size()); }
  void validate() const;  // sizes equal, all entries strictly positive
};

/// Bandwidth-normalized gains (the bar quantities).
struct ScaledGainSet {
  Vec Kp, Kd, K1, K2, K3;

  int n() const { return static_cast<int>(Kp.size()); }
  void validate() const;
};

/// Per component: Kp = (k w)^2 Kp_bar, Kd = k w Kd_bar, K_i = w^i K_i_bar.
GainSet unscale_gains(const ScaledGainSet& scaled, double omega, double kappa);
ScaledGainSet scale_gains(const GainSet& raw, double omega, double kappa);

// Structural matrices of the closed loop, from diagonal gain entries.
Mat build_Hc(const Vec& kp, const Vec& kd);                 // [0 I; -Kp -Kd]
Mat build_Ho(const Vec& k1, const Vec& k2, const Vec& k3);  // [-K1 I 0; -K2 0 I; -K3 0 0]
Mat build_W1(const Vec& kp, const Vec& kd);                 // [0 0 0; -Kp -Kd -I]
Mat build_W2(const Vec& kp, const Vec& kd);                 // [Kp Kd I]
Mat build_Kc(const Vec& kp, const Vec& kd);                 // [Kp Kd]

// Selector matrices.
Mat selector_C0(int n);  // [0; -I; 0]  (3n x n)
Mat selector_C1(int n);  // [0; 0; I]   (3n x n)
Mat selector_C2(int n);  // [0; I]      (2n x n)

/// Scaled tracking error e_bar = (k w)^-1 Delta_2(k w) e.
Vec scale_tracking_error(const Vec& e, double omega, double kappa);
Vec unscale_tracking_error(const Vec& e_bar, double omega, double kappa);
/// Scaled observation error z_bar = w^-2 Delta_3(w) z_tilde.
Vec scale_observation_error(const Vec& z_tilde, double omega);
Vec unscale_observation_error(const Vec& z_bar, double omega);

/// One consistent set of raw and normalized gains together with every
/// structural matrix the analysis needs. Construction verifies that the
/// normalized closed-loop matrices are Hurwitz.
class ScaledSystem {
 public:
  ScaledSystem(GainSet raw, double omega, double kappa);
  static ScaledSystem from_scaled(const ScaledGainSet& scaled, double omega, double kappa);

  int n() const { return raw_.n(); }
  double omega() const { return omega_; }
  double kappa() const { return kappa_; }
  const GainSet& raw() const { return raw_; }
  const ScaledGainSet& scaled() const { return scaled_; }

  const Mat& Hc() const { return Hc_; }
  const Mat& Ho() const { return Ho_; }
  const Mat& W1() const { return W1_; }
  const Mat& W2() const { return W2_; }
  const Mat& Kc() const { return Kc_; }
  const Mat& Hc_bar() const { return Hc_bar_; }
  const Mat& Ho_bar() const { return Ho_bar_; }
  const Mat& W1_bar() const { return W1_bar_; }
  const Mat& W2_bar() const { return W2_bar_; }
  const Mat& Kc_bar() const { return Kc_bar_; }
  /// Stacked scaled observer gain w^-3 Delta_3(w) [K1; K2; K3] (3n x n).
  Mat Ko_bar() const;

 private:
  GainSet raw_;
  ScaledGainSet scaled_;
  double omega_, kappa_;
  Mat Hc_, Ho_, W1_, W2_, Kc_;
  Mat Hc_bar_, Ho_bar_, W1_bar_, W2_bar_, Kc_bar_;
};

/// Max-norm residuals of the five scaling identities relating raw and
/// normalized structural matrices.
struct ScalingIdentityReport {
  double hc = 0;        // D2(kw) Hc D2^-1(kw) - kw Hc_bar
  double ho = 0;        // D3(w) Ho D3^-1(w) - w Ho_bar
  double w1_left = 0;   // D2(kw) W1 - W1
  double w1_right = 0;  // W1 D3^-1(w) - W1_bar D3(k)
  double w2 = 0;        // W2 - W2_bar D3(kw)

  double max_residual() const;
};

ScalingIdentityReport verify_scaling_identities(const ScaledSystem& sys);

/// Scaled error dynamics:
///   e_bar_dot = k w Hc_bar e_bar + k^-1 w W1_bar D3(k) z_bar + (k w)^-1 C2 B u_tilde
///   z_bar_dot = w Ho_bar z_bar + w^-1 C0 B u_tilde + w^-2 C1 z3_dot
struct ScaledErrorDerivatives {
  Vec e_bar_dot, z_bar_dot;
};

ScaledErrorDerivatives scaled_error_derivatives(const ScaledSystem& sys, const Vec& e_bar,
                                                const Vec& z_bar, const Vec& u_tilde,
                                                const Vec& z3_dot, const Mat& B);

/// Real part of the rightmost eigenvalue (spectral abscissa).
double spectral_abscissa(const Mat& m);

}  // namespace adrc

#include "adrc/observer.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace adrc {

ObserverGains::ObserverGains(Vec k1, Vec k2, Vec k3)
    : k1_(std::move(k1)), k2_(std::move(k2)), k3_(std::move(k3)) {
  const int dim = n();
  if (dim == 0 || k2_.size() != dim || k3_.size() != dim)
    throw std::invalid_argument("ObserverGains: inconsistent sizes");
  // Diagonal gains decouple H_o into per-axis 3x3 companion blocks; checking
  // those is enough and avoids a 3n x 3n eigensolve.
  for (int i = 0; i < dim; ++i) {
    Eigen::Matrix3d block;
    block << -k1_(i), 1, 0,  //
        -k2_(i), 0, 1,       //
        -k3_(i), 0, 0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(block, /*computeEigenvectors=*/false);
    const double abscissa = es.eigenvalues().real().maxCoeff();
    if (abscissa >= -1e-9)
      throw std::invalid_argument("ObserverGains: induced H_o is not Hurwitz on axis " +
                                  std::to_string(i) + " (max Re eigenvalue " +
                                  std::to_string(abscissa) + ")");
  }
}

Vec observer_derivative(const ObserverGains& gains, const Vec& z_hat, const Vec& z1_measured,
                        const Vec& h_u, const Vec& Bv) {
  const int n = gains.n();
  if (z_hat.size() != 3 * n || z1_measured.size() != n || h_u.size() != n || Bv.size() != n)
    throw std::invalid_argument("observer_derivative: dimension mismatch");
  const auto z1_hat = z_hat.segment(0, n);
  const auto z2_hat = z_hat.segment(n, n);
  const auto z3_hat = z_hat.segment(2 * n, n);
  const Vec innovation = z1_measured - z1_hat;

  Vec d(3 * n);
  d.segment(0, n) = gains.k1().cwiseProduct(innovation) + z2_hat;
  d.segment(n, n) = gains.k2().cwiseProduct(innovation) + z3_hat + h_u + Bv;
  d.segment(2 * n, n) = gains.k3().cwiseProduct(innovation);
  return d;
}

Vec observation_error_derivative(const Mat& Ho, const Vec& z_tilde, const Vec& Bu_tilde,
                                 const Vec& z3_dot) {
  const int n = static_cast<int>(Bu_tilde.size());
  if (Ho.rows() != 3 * n || Ho.cols() != 3 * n || z_tilde.size() != 3 * n ||
      z3_dot.size() != n)
    throw std::invalid_argument("observation_error_derivative: dimension mismatch");
  return Ho * z_tilde + selector_C0(n) * Bu_tilde + selector_C1(n) * z3_dot;
}

}  // namespace adrc

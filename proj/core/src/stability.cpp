#include "adrc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace adrc {

Mat solve_lyapunov(const Mat& H, const Mat& Q) {
  const int m = static_cast<int>(H.rows());
  if (H.cols() != m || Q.rows() != m || Q.cols() != m)
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  if (max_abs(Q - Q.transpose()) > 1e-12 * (1.0 + max_abs(Q)))
    throw std::invalid_argument("solve_lyapunov: Q must be symmetric");
  const double abscissa = spectral_abscissa(H);
  if (abscissa >= 0)
    throw std::invalid_argument("solve_lyapunov: H is not Hurwitz (max Re eigenvalue " +
                                std::to_string(abscissa) + ")");

  // Vectorized form: (I (x) H^T + H^T (x) I) vec(P) = -vec(Q).
  const Mat Ht = H.transpose();
  Mat K = Mat::Zero(m * m, m * m);
  for (int c = 0; c < m; ++c) K.block(c * m, c * m, m, m) = Ht;
  for (int bc = 0; bc < m; ++bc)
    for (int br = 0; br < m; ++br)
      K.block(br * m, bc * m, m, m).diagonal().array() += Ht(br, bc);

  Vec q(m * m);
  for (int c = 0; c < m; ++c) q.segment(c * m, m) = -Q.col(c);
  const Vec p = K.partialPivLu().solve(q);

  Mat P(m, m);
  for (int c = 0; c < m; ++c) P.col(c) = p.segment(c * m, m);
  P = 0.5 * (P + P.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::runtime_error("solve_lyapunov: solution is not positive definite");
  return P;
}

double LyapunovPair::lyapunov_value(const Vec& e_bar, const Vec& z_bar,
                                    const Vec& u_tilde) const {
  return 0.5 * e_bar.dot(Pc_bar * e_bar) + 0.5 * z_bar.dot(Po_bar * z_bar) +
         0.5 * u_tilde.squaredNorm();
}

LyapunovPair make_lyapunov_pair(const ScaledSystem& sys, const Mat& Qc_bar, const Mat& Qo_bar) {
  LyapunovPair pair;
  pair.Qc_bar = Qc_bar;
  pair.Qo_bar = Qo_bar;
  pair.Pc_bar = solve_lyapunov(sys.Hc_bar(), Qc_bar);
  pair.Po_bar = solve_lyapunov(sys.Ho_bar(), Qo_bar);
  return pair;
}

Mat assemble_QY1(const ScaledSystem& sys, const LyapunovPair& pair, const Mat& B,
                 const Vec& time_constants) {
  const int n = sys.n();
  if (B.rows() != n || B.cols() != n || time_constants.size() != n)
    throw std::invalid_argument("assemble_QY1: dimension mismatch");
  const double w = sys.omega();
  const double k = sys.kappa();
  const Mat d3k = delta(3, k, n);
  const Mat C0 = selector_C0(n);
  const Mat C2 = selector_C2(n);
  const Mat Binv = B.partialPivLu().solve(Mat::Identity(n, n));

  Mat q = Mat::Zero(6 * n, 6 * n);
  q.block(0, 0, 2 * n, 2 * n) = k * pair.Qc_bar;
  q.block(2 * n, 2 * n, 3 * n, 3 * n) = pair.Qo_bar;
  q.block(5 * n, 5 * n, n, n) =
      Mat((2.0 / w) * time_constants.cwiseInverse().asDiagonal());

  const Mat q12 = -(1.0 / k) * pair.Pc_bar * sys.W1_bar() * d3k;
  q.block(0, 2 * n, 2 * n, 3 * n) = q12;
  q.block(2 * n, 0, 3 * n, 2 * n) = q12.transpose();

  const Mat q13 = -(1.0 / (k * w * w)) * (pair.Pc_bar * C2 * B) -
                  (k * k * k * w * w) * (Binv * sys.Kc_bar() * sys.Hc_bar()).transpose();
  q.block(0, 5 * n, 2 * n, n) = q13;
  q.block(5 * n, 0, n, 2 * n) = q13.transpose();

  const Mat coupling = k * sys.Kc_bar() * sys.W1_bar() * d3k + sys.W2_bar() * d3k * sys.Ho_bar();
  const Mat q23 = -(1.0 / (w * w)) * (pair.Po_bar * C0 * B) -
                  (w * w) * (Binv * coupling).transpose();
  q.block(2 * n, 5 * n, 3 * n, n) = q23;
  q.block(5 * n, 2 * n, n, 3 * n) = q23.transpose();
  return q;
}

bool is_positive_definite(const Mat& S, double rel_tol) {
  // A failed factorization settles it; a successful one still has to clear
  // the relative eigenvalue tolerance, so the spectrum decides either way.
  Eigen::LLT<Mat> llt(S);
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (llt.info() != Eigen::Success && lo <= 0) return false;
  return lo > rel_tol * std::abs(hi);
}

namespace {

double norm_row2(double a, double b) { return std::hypot(a, b); }
double norm_row3(double a, double b, double c) { return std::sqrt(a * a + b * b + c * c); }

}  // namespace

PerturbationBounds perturbation_bounds(const ScaledSystem& sys, const LyapunovPair& pair,
                                       const DisturbanceBounds& bounds,
                                       const std::array<double, 4>& trajectory_bounds,
                                       const Mat& B, const Vec& time_constants) {
  bounds.validate();
  const int n = sys.n();
  const double w = sys.omega();
  const double k = sys.kappa();
  const double kw = k * w;
  const double xb1 = trajectory_bounds[1];
  const double xb2 = trajectory_bounds[2];
  const double xb3 = trajectory_bounds[3];

  const Mat Binv = B.partialPivLu().solve(Mat::Identity(n, n));
  const double nB = spectral_norm(B);
  const double nBinv = spectral_norm(Binv);
  const double nTinv = time_constants.cwiseInverse().maxCoeff();
  const double nPoC1 = spectral_norm(pair.Po_bar * selector_C1(n));
  const double nHc = spectral_norm(sys.Hc_bar());
  const double nHo = spectral_norm(sys.Ho_bar());
  const double nW1 = spectral_norm(sys.W1_bar());
  const double nC2B = nB;  // C2 stacks B under a zero block
  const double nC0B = nB;

  PerturbationBounds pb;
  pb.w_h2b = norm_row2(2 * bounds.h1a + bounds.h2a, kw * (2 * bounds.h1b + bounds.h2b));
  pb.w_h3b = norm_row3(bounds.h1a, w * bounds.h1b, 0);
  pb.w_h5b = norm_row2(bounds.h1a, kw * bounds.h1b);
  pb.w_q2b = norm_row2(bounds.q_z1, kw * bounds.q_z2);

  pb.y2.linear = nBinv * xb3;

  pb.y31.linear =
      (nPoC1 / (w * w)) * ((2 * bounds.h1a + 2 * bounds.h2a) * xb1 +
                           (2 * bounds.h1b + 2 * bounds.h2b) * xb2);
  pb.y31.quadratic = nPoC1 * ((k / w) * pb.w_h2b * (nHc + nW1) +
                              pb.w_h2b * nC2B / (k * w * w * w)) +
                     nPoC1 * (pb.w_h3b * nHo / w + nB * bounds.h1b / (w * w));

  pb.y32_printed.linear =
      (nPoC1 / (w * w)) * (bounds.q_z1 * xb1 + bounds.q_z2 * xb2 + nB * bounds.q_z2 +
                           nTinv * bounds.q_u + nPoC1 * bounds.q_t);
  pb.y32_printed.quadratic = (k / w) * nPoC1 * pb.w_q2b * (nHc + nW1);

  pb.y32_derived.linear =
      nBinv * ((bounds.h1a + bounds.h2a) * xb1 + (bounds.h1b + bounds.h2b) * xb2);
  pb.y32_derived.quadratic =
      nBinv * (kw * pb.w_h5b * (nHc + nW1) + pb.w_h5b * nC2B / kw +
               w * pb.w_h3b * nHo + pb.w_h3b * nC0B / w);

  pb.y4.linear = (nPoC1 / (w * w)) * (bounds.q_z1 * xb1 + bounds.q_z2 * xb2 + bounds.q_t);
  pb.y4.quadratic = (nPoC1 / w) * pb.w_q2b * (nHc + nW1 + nC2B / (w * w)) +
                    (nPoC1 / (w * w)) * (nTinv * bounds.q_u);
  return pb;
}

LyapunovMeasures lyapunov_measures(const ScaledSystem& sys, const LyapunovPair& pair,
                                   const DisturbanceBounds& bounds,
                                   const std::array<double, 4>& trajectory_bounds,
                                   const Mat& B, const Vec& time_constants) {
  const int n = sys.n();
  const double w = sys.omega();
  const double k = sys.kappa();
  const Mat qy1 = assemble_QY1(sys, pair, B, time_constants);
  Eigen::SelfAdjointEigenSolver<Mat> es(qy1, Eigen::EigenvaluesOnly);

  const PerturbationBounds pb =
      perturbation_bounds(sys, pair, bounds, trajectory_bounds, B, time_constants);

  const Mat Binv = B.partialPivLu().solve(Mat::Identity(n, n));
  const double nB = spectral_norm(B);
  const double nBinv = spectral_norm(Binv);
  const double nPoC1 = spectral_norm(pair.Po_bar * selector_C1(n));
  const double nHc = spectral_norm(sys.Hc_bar());
  const double nHo = spectral_norm(sys.Ho_bar());
  const double nW1 = spectral_norm(sys.W1_bar());

  LyapunovMeasures m;
  m.lambda_min_QY1 = es.eigenvalues().minCoeff();
  m.lambda_max_QY1 = es.eigenvalues().maxCoeff();
  m.Lambda_V = 0.5 * w * m.lambda_min_QY1                                 //
               - k * w * nBinv * pb.w_h5b * (nHc + nW1)                   //
               - w * nBinv * pb.w_h3b * nHo                               //
               - 2.0 * bounds.h1b                                         //
               - pb.w_h3b * nHo / w                                       //
               - (k / w) * nPoC1 * (pb.w_h2b + pb.w_q2b) * (nHc + nW1)    //
               - nB * bounds.h1b / (w * w)                                //
               - pb.w_h2b * nB / (k * w * w * w);
  m.gamma_nominal = pb.y32_derived.linear + pb.y32_printed.linear;
  m.Gamma_V = m.gamma_nominal + pb.y2.linear + pb.y31.linear;
  return m;
}

StabilityReport evaluate_certificate(const StabilityProblem& problem, double omega,
                                     double kappa) {
  ScaledSystem sys = ScaledSystem::from_scaled(problem.gains, omega, kappa);
  const LyapunovPair pair = make_lyapunov_pair(sys, problem.Qc_bar, problem.Qo_bar);
  const LyapunovMeasures m = lyapunov_measures(sys, pair, problem.bounds,
                                               problem.trajectory_bounds, problem.B,
                                               problem.time_constants);
  StabilityReport r;
  r.omega = omega;
  r.kappa = kappa;
  r.lambda_min_QY1 = m.lambda_min_QY1;
  r.lambda_max_QY1 = m.lambda_max_QY1;
  r.c1 = m.lambda_min_QY1 > 1e-12 * std::abs(m.lambda_max_QY1);
  r.c2 = m.Gamma_V >= 0;
  r.Lambda_V = m.Lambda_V;
  r.Gamma_V = m.Gamma_V;
  r.gamma_nominal = m.gamma_nominal;
  r.error_bound = m.error_bound();
  return r;
}

std::vector<double> SweepGrid::values() const {
  if (points < 2 || min <= 0 || max <= min)
    throw std::invalid_argument("SweepGrid: need min > 0, max > min, points >= 2");
  std::vector<double> v(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double s = static_cast<double>(i) / (points - 1);
    v[static_cast<size_t>(i)] =
        log_spacing ? min * std::pow(max / min, s) : min + s * (max - min);
  }
  return v;
}

namespace {

// Bisection refinement of the C1 boundary between two grid abscissae.
double refine_boundary(const std::function<bool(double)>& feasible, double inside,
                       double outside, int iterations) {
  double a = inside, b = outside;
  for (int i = 0; i < iterations; ++i) {
    const double mid = std::sqrt(a * b);  // grids are logarithmic
    if (feasible(mid))
      a = mid;
    else
      b = mid;
  }
  return a;
}

std::vector<Interval> extract_intervals(const std::vector<double>& grid,
                                        const std::vector<bool>& ok,
                                        const std::function<bool(double)>& feasible,
                                        int bisection_iterations) {
  std::vector<Interval> intervals;
  const size_t m = grid.size();
  size_t i = 0;
  while (i < m) {
    if (!ok[i]) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j + 1 < m && ok[j + 1]) ++j;
    Interval iv{grid[i], grid[j]};
    if (i > 0) iv.lo = refine_boundary(feasible, grid[i], grid[i - 1], bisection_iterations);
    if (j + 1 < m)
      iv.hi = refine_boundary(feasible, grid[j], grid[j + 1], bisection_iterations);
    intervals.push_back(iv);
    i = j + 1;
  }
  return intervals;
}

}  // namespace

FeasibleSetResult feasible_sets(const StabilityProblem& problem, double base_omega,
                                double base_kappa, const SweepGrid& omega_grid,
                                const SweepGrid& kappa_grid) {
  FeasibleSetResult result;

  const auto omega_values = omega_grid.values();
  std::vector<bool> omega_ok(omega_values.size());
  for (size_t i = 0; i < omega_values.size(); ++i) {
    result.omega_sweep.push_back(evaluate_certificate(problem, omega_values[i], base_kappa));
    omega_ok[i] = result.omega_sweep.back().c1;
  }
  auto omega_feasible_at = [&](double w) {
    return evaluate_certificate(problem, w, base_kappa).c1;
  };
  result.omega_feasible = extract_intervals(omega_values, omega_ok, omega_feasible_at,
                                            omega_grid.bisection_iterations);

  const auto kappa_values = kappa_grid.values();
  std::vector<bool> kappa_ok(kappa_values.size());
  for (size_t i = 0; i < kappa_values.size(); ++i) {
    result.kappa_sweep.push_back(evaluate_certificate(problem, base_omega, kappa_values[i]));
    kappa_ok[i] = result.kappa_sweep.back().c1;
  }
  auto kappa_feasible_at = [&](double k) {
    return evaluate_certificate(problem, base_omega, k).c1;
  };
  result.kappa_feasible = extract_intervals(kappa_values, kappa_ok, kappa_feasible_at,
                                            kappa_grid.bisection_iterations);
  return result;
}

}  // namespace adrc

#include <cmath>

#include "doctest.h"

#include <unsupported/Eigen/MatrixFunctions>

#include "adrc/observer.hpp"
#include "support/oracles.hpp"

using namespace adrc;

TEST_CASE("observer gain validation") {
  SUBCASE("table gains at omega 1 are accepted") {
    ObserverGains gains(Vec::Constant(1, 3.0), Vec::Constant(1, 3.0), Vec::Constant(1, 1.0));
    Mat expected(3, 3);
    expected << -3, 1, 0, -3, 0, 1, -1, 0, 0;
    CHECK((gains.Ho() - expected).norm() == doctest::Approx(0.0));
    // (lambda + 1)^3: triple eigenvalue at -1. The defective root splits
    // numerically at the eps^(1/3) scale, so the tolerance is loose.
    Eigen::EigenSolver<Mat> es(gains.Ho());
    for (int i = 0; i < 3; ++i) {
      CHECK(es.eigenvalues()(i).real() == doctest::Approx(-1.0).epsilon(1e-4));
      CHECK(std::abs(es.eigenvalues()(i).imag()) < 1e-4);
    }
  }
  SUBCASE("zero gains are rejected as non-Hurwitz") {
    CHECK_THROWS_AS(
        ObserverGains(Vec::Constant(1, 1e-18), Vec::Constant(1, 1e-18), Vec::Constant(1, 1e-18)),
        std::invalid_argument);
  }
  SUBCASE("violating the Routh condition k1 k2 > k3 is rejected") {
    CHECK_THROWS_AS(
        ObserverGains(Vec::Constant(1, 1.0), Vec::Constant(1, 1.0), Vec::Constant(1, 2.0)),
        std::invalid_argument);
  }
}

TEST_CASE("observer derivative follows the innovation structure") {
  ObserverGains gains(Vec::Constant(1, 3.0), Vec::Constant(1, 3.0), Vec::Constant(1, 1.0));
  SUBCASE("zero innovation leaves only state feed-through") {
    Vec z_hat(3);
    z_hat << 0.5, 0.0, 0.0;
    const Vec d = observer_derivative(gains, z_hat, Vec::Constant(1, 0.5), Vec::Zero(1),
                                      Vec::Zero(1));
    CHECK(d.norm() == doctest::Approx(0.0));
  }
  SUBCASE("pure innovation scales by the gains") {
    const Vec d = observer_derivative(gains, Vec::Zero(3), Vec::Constant(1, 1.0), Vec::Zero(1),
                                      Vec::Zero(1));
    CHECK(d(0) == doctest::Approx(3.0));
    CHECK(d(1) == doctest::Approx(3.0));
    CHECK(d(2) == doctest::Approx(1.0));
  }
}

TEST_CASE("observation error dynamics place the couplings correctly") {
  ObserverGains gains(Vec::Constant(1, 3.0), Vec::Constant(1, 3.0), Vec::Constant(1, 1.0));
  const Mat ho = gains.Ho();
  CHECK(observation_error_derivative(ho, Vec::Zero(3), Vec::Zero(1), Vec::Zero(1)).norm() ==
        doctest::Approx(0.0));
  const Vec d =
      observation_error_derivative(ho, Vec::Zero(3), Vec::Constant(1, 2.0), Vec::Zero(1));
  CHECK(d(0) == doctest::Approx(0.0));
  CHECK(d(1) == doctest::Approx(-2.0));
  CHECK(d(2) == doctest::Approx(0.0));
  const Vec dz =
      observation_error_derivative(ho, Vec::Zero(3), Vec::Zero(1), Vec::Constant(1, 0.7));
  CHECK(dz(2) == doctest::Approx(0.7));
}

TEST_CASE("free observation error decays like the matrix exponential") {
  // With u_tilde = 0 and z3_dot = 0 the error obeys z~' = Ho z~ exactly.
  ObserverGains gains(Vec::Constant(1, 30.0), Vec::Constant(1, 300.0),
                      Vec::Constant(1, 1000.0));
  const Mat ho = gains.Ho();
  Vec z0(3);
  z0 << 0.0, 0.0, 1.0;

  auto rhs = [&](double, const Vec& z) { return (ho * z).eval(); };
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    const Vec numeric = oracles::rk4_integrate(rhs, z0, 0.0, t, 1e-4);
    const Vec exact = (ho * t).exp() * z0;
    CHECK((numeric - exact).norm() < 1e-9 * std::max(1.0, exact.norm()));
    // exponential envelope with the triple pole at -omega = -10
    CHECK(numeric.norm() <= 1e3 * std::exp(-10.0 * t) * std::pow(1.0 + 10.0 * t, 2));
  }
}

TEST_CASE("bandwidth scaling law: scaled errors follow the omega = 1 flow in dilated time") {
  // Run the free error system at omega and compare z_bar(t) against the
  // omega = 1 trajectory evaluated at omega * t.
  const double w = 2.0;
  ObserverGains fast(Vec::Constant(1, 3.0 * w), Vec::Constant(1, 3.0 * w * w),
                     Vec::Constant(1, w * w * w));
  ObserverGains unit(Vec::Constant(1, 3.0), Vec::Constant(1, 3.0), Vec::Constant(1, 1.0));
  const Mat ho_fast = fast.Ho();
  const Mat ho_unit = unit.Ho();

  Vec z_tilde0(3);
  z_tilde0 << 0.7, -0.4, 0.2;
  const Vec z_bar0 = scale_observation_error(z_tilde0, w);

  auto rhs_fast = [&](double, const Vec& z) { return (ho_fast * z).eval(); };
  auto rhs_unit = [&](double, const Vec& z) { return (ho_unit * z).eval(); };

  for (double t : {0.2, 0.8, 1.6}) {
    const Vec z_tilde_t = oracles::rk4_integrate(rhs_fast, z_tilde0, 0.0, t, 5e-5);
    const Vec z_bar_t = scale_observation_error(z_tilde_t, w);
    const Vec reference = oracles::rk4_integrate(rhs_unit, z_bar0, 0.0, w * t, 5e-5);
    CHECK((z_bar_t - reference).norm() < 1e-6);
  }
}

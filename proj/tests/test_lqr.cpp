#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "sctl/lqr.hpp"
#include "sctl/rng.hpp"

using namespace sctl;

TEST_CASE("scalar CARE matches the closed form") {
  // -2p - p^2 + 1 = 0  ->  p = -1 + sqrt(2)
  const Eigen::Matrix<double, 1, 1> A(-1.0), Q(1.0);
  const Eigen::Matrix<double, 1, 1> B(1.0);
  const auto P = solve_care<double, 1>(A, B, Q, 1.0);
  CHECK(std::abs(P(0, 0) - (std::sqrt(2.0) - 1.0)) < 1e-12);
  const auto K = lqr_gain<double, 1>(P, B, 1.0);
  CHECK(std::abs(K(0) - 0.41421356237309503) < 1e-12);
}

TEST_CASE("zero state weight with Hurwitz A gives P = 0") {
  Eigen::Matrix2d A;
  A << 0.0, 1.0, -4.0, -1.0;
  const auto P = solve_care<double, 2>(A, Eigen::Vector2d(0.0, 1.0), Eigen::Matrix2d::Zero(), 1.0);
  CHECK(P.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(lqr_gain<double, 2>(P, Eigen::Vector2d(0.0, 1.0), 1.0).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("assumed model design satisfies the Riccati invariants") {
  const LqrPolicy pol = design_lqr(PlantParams::assumed_plant(), Eigen::Matrix2d::Identity(), 1e-3);
  const StateSpace ss = StateSpace::from_plant(PlantParams::assumed_plant());
  CHECK(ss.controllable());
  CHECK(care_residual<double, 2>(ss.A, ss.B, pol.Q, pol.R, pol.P) < 1e-8);
  CHECK((pol.P - pol.P.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(pol.P);
  CHECK(es.eigenvalues().minCoeff() >= 0.0);
  CHECK(is_hurwitz<double, 2>(ss.A - ss.B * pol.K));
  // assumed model: A = [[0, 1], [-181/1.6, 0.5/1.6]] (unstable open loop)
  CHECK(ss.A(1, 0) == doctest::Approx(-113.125));
  CHECK(ss.A(1, 1) == doctest::Approx(0.3125));
  CHECK_FALSE(is_hurwitz<double, 2>(ss.A));
}

TEST_CASE("gain scaling identity and linearity of the force") {
  const LqrPolicy pol = design_lqr(PlantParams::assumed_plant(), Eigen::Matrix2d::Identity(), 1e-3);
  const Eigen::Vector2d B = StateSpace::from_plant(pol.assumed).B;
  const auto K1 = lqr_gain<double, 2>(pol.P, B, pol.R);
  const auto K2 = lqr_gain<double, 2>(Eigen::Matrix2d(2.0 * pol.P), B, 2.0 * pol.R);
  CHECK((K1 - K2).cwiseAbs().maxCoeff() < 1e-12);

  LqrPolicy fixed;
  fixed.K << 2.0, 3.0;
  CHECK(lqr_force(fixed, 0.0, 0.0) == 0.0);
  CHECK(lqr_force(fixed, 1.0, -1.0) == 1.0);
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.normal(), x = rng.normal(), v = rng.normal();
    CHECK(lqr_force(pol, a * x, a * v) == doctest::Approx(a * lqr_force(pol, x, v)).epsilon(1e-12));
  }
}

TEST_CASE("randomized controllable systems") {
  Rng rng(2024);
  int checked = 0;
  while (checked < 100) {
    Eigen::Matrix2d A;
    A << rng.normal() * 3, rng.normal() * 3, rng.normal() * 3, rng.normal() * 3;
    const Eigen::Vector2d B(rng.normal(), rng.normal());
    Eigen::Matrix2d L;
    L << rng.normal(), 0.0, rng.normal(), rng.normal();
    const Eigen::Matrix2d Q = L * L.transpose() + 1e-3 * Eigen::Matrix2d::Identity();
    const double R = std::exp(rng.normal());
    Eigen::Matrix2d C;
    C << B, A * B;
    const Eigen::Vector2d sv = C.jacobiSvd().singularValues();
    if (!detail::controllable<double, 2>(A, B) || sv(1) < 1e-3 * sv(0)) continue;
    const auto P = solve_care<double, 2>(A, B, Q, R);
    const auto K = lqr_gain<double, 2>(P, B, R);
    CHECK(care_residual<double, 2>(A, B, Q, R, P) < 1e-8);
    CHECK(is_hurwitz<double, 2>(A - B * K));
    ++checked;
  }
}

TEST_CASE("uncontrollable pair is a design error") {
  Eigen::Matrix2d A;
  A << 1.0, 0.0, 0.0, 2.0;
  CHECK_THROWS_AS((solve_care<double, 2>(A, Eigen::Vector2d(1.0, 0.0), Eigen::Matrix2d::Identity(), 1.0)),
                  DesignError);
  CHECK_THROWS_AS((solve_care<double, 2>(A, Eigen::Vector2d(1.0, 1.0), Eigen::Matrix2d::Identity(), 0.0)),
                  InputError);
}

TEST_CASE("provenance record lists the design") {
  const LqrPolicy pol = design_lqr(PlantParams::assumed_plant(), Eigen::Matrix2d::Identity(), 1e-3);
  std::ostringstream os;
  write_lqr_record(os, pol);
  const std::string text = os.str();
  CHECK(text.find("assumed.m = 1.6") != std::string::npos);
  CHECK(text.find("assumed.c = -0.5") != std::string::npos);
  CHECK(text.find("R = 0.001") != std::string::npos);
  CHECK(text.find("K = ") != std::string::npos);
}

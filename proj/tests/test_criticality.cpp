#include <doctest.h>

#include <cmath>
#include <memory>
#include <optional>
#include <random>

#include <Eigen/Core>

#include "psarp/criticality.hpp"
#include "psarp/errors.hpp"
#include "psarp/problem.hpp"

using namespace psarp;

TEST_CASE("measure scaling chi") {
  CHECK(chi(1, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(chi(2, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(chi(2, 0.5) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK_THROWS_AS(chi(0, 1.0), DomainError);
}

namespace {
Problem two_group_problem() {
  // f(x) = 1/2||x - c||^2 + ||(x1,x2)||^a + ||(x3,x4)||^a on R^5
  Problem p;
  p.n = 5;
  p.feasible = FeasibleSet::whole_space(5);

  SmoothElement se;
  se.U = Eigen::MatrixXd::Identity(5, 5);
  Eigen::VectorXd c(5);
  c << 1, 2, 3, 4, 5;
  se.oracle =
      std::make_shared<QuadraticOracle>(Eigen::MatrixXd::Identity(5, 5), c);
  se.oracle_name = "quadratic";
  p.smooth.push_back(se);

  for (int g = 0; g < 2; ++g) {
    HardElement he;
    he.U = Eigen::MatrixXd::Zero(2, 5);
    he.U(0, 2 * g) = 1.0;
    he.U(1, 2 * g + 1) = 1.0;
    he.b = Eigen::VectorXd::Zero(2);
    he.a = 0.5;
    p.hard.push_back(he);
  }
  return p;
}
}  // namespace

TEST_CASE("classification splits near-zero and clearly nonzero residuals") {
  Problem p = two_group_problem();
  Eigen::VectorXd x(5);
  x << 1e-5, 0.0, 1.0, 1.0, 7.0;
  auto cls = classify(p, x, 1e-3);
  REQUIRE(cls.critical.size() == 1);
  CHECK(cls.critical[0] == 0);
  REQUIRE(cls.active.size() == 1);
  CHECK(cls.active[0] == 1);
  // kernel of the first selector: coordinates 3..5
  REQUIRE(cls.Q.cols() == 3);
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(cls.Q(0, c)) < 1e-12);
    CHECK(std::abs(cls.Q(1, c)) < 1e-12);
  }
  CHECK(((cls.Q.transpose() * cls.Q) -
         Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);

  // residual exactly at the boundary counts as critical
  x << 1e-3, 0.0, 1.0, 1.0, 7.0;
  cls = classify(p, x, 1e-3);
  CHECK(cls.critical.size() == 1);

  // no critical elements: Q is the identity
  x << 1.0, 1.0, 1.0, 1.0, 7.0;
  cls = classify(p, x, 1e-3);
  CHECK(cls.critical.empty());
  CHECK((cls.Q - Eigen::MatrixXd::Identity(5, 5)).norm() == 0.0);
}

TEST_CASE("first-order measure closed form on the whole space") {
  // psi = delta ||Q Q^T g|| for q = 1, unconstrained
  Eigen::VectorXd g(2);
  g << 3.0, 4.0;
  const auto all = FeasibleSet::whole_space(2);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(2);

  auto r = psi_from_derivatives(g, std::nullopt, all, I, x, 1, 1.0);
  CHECK(r.psi == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(r.chi_value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.exact);

  // restricted to span(e1) only the first component counts
  Eigen::MatrixXd Q(2, 1);
  Q << 1.0, 0.0;
  r = psi_from_derivatives(g, std::nullopt, all, Q, x, 1, 0.5);
  CHECK(r.psi == doctest::Approx(1.5).epsilon(1e-9));

  // randomized closed-form agreement
  std::mt19937 rng(77);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd gg(4);
    for (int t = 0; t < 4; ++t) gg[t] = gauss(rng);
    std::uniform_real_distribution<double> ud(0.1, 1.0);
    const double delta = ud(rng);
    const auto all4 = FeasibleSet::whole_space(4);
    const Eigen::MatrixXd I4 = Eigen::MatrixXd::Identity(4, 4);
    auto rr = psi_from_derivatives(gg, std::nullopt, all4, I4,
                                   Eigen::VectorXd::Zero(4), 1, delta);
    CHECK(rr.psi == doctest::Approx(delta * gg.norm()).epsilon(1e-9));
  }
}

TEST_CASE("invalid measure order is rejected") {
  Eigen::VectorXd g = Eigen::VectorXd::Ones(2);
  const auto all = FeasibleSet::whole_space(2);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(psi_from_derivatives(g, std::nullopt, all, I,
                                       Eigen::VectorXd::Zero(2), 3, 1.0),
                  DomainError);
}

TEST_CASE("measure vanishes at an interior minimizer and grows with delta") {
  // f(x) = 1/2||x - c||^2, smooth only; at x = c the measure is zero
  Problem p;
  p.n = 3;
  p.feasible = FeasibleSet::whole_space(3);
  SmoothElement se;
  se.U = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd c(3);
  c << 1.0, -2.0, 0.5;
  se.oracle =
      std::make_shared<QuadraticOracle>(Eigen::MatrixXd::Identity(3, 3), c);
  se.oracle_name = "quadratic";
  p.smooth.push_back(se);

  auto at_min = psi_measure(p, c, 1e-3, 1, 1.0);
  CHECK(at_min.psi < 1e-10);

  Eigen::VectorXd x = c + Eigen::VectorXd::Ones(3);
  auto m_small = psi_measure(p, x, 1e-3, 1, 0.25);
  auto m_large = psi_measure(p, x, 1e-3, 1, 1.0);
  CHECK(m_small.psi <= m_large.psi + 1e-12);
  // q = 1: psi = delta ||g|| = delta sqrt(3) here
  CHECK(m_large.psi == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));

  // second-order measure is at least as demanding for a convex quadratic
  auto q2 = psi_measure(p, x, 1e-3, 2, 1.0);
  CHECK(q2.psi >= 0.0);
  CHECK(q2.chi_value == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("frozen groups drop out of the measure") {
  Problem p = two_group_problem();
  Eigen::VectorXd x(5);
  x << 0.0, 0.0, 3.0, 4.0, 5.0;
  // first group residual is zero -> classify marks it critical, and the
  // measure sees only its kernel directions; it is finite (no singularity)
  auto r = psi_measure(p, x, 1e-3, 1, 1.0);
  CHECK(std::isfinite(r.psi));
  CHECK(r.psi >= 0.0);
  // the inner direction never moves the frozen residual
  const Eigen::MatrixXd U0 = p.hard[0].U;
  CHECK((U0 * r.d).norm() < 1e-9);
}

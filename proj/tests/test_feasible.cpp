#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Core>

#include "psarp/feasible.hpp"

using namespace psarp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}
}  // namespace

TEST_CASE("box projection clamps and is idempotent / nonexpansive") {
  Eigen::VectorXd lo(3), hi(3);
  lo << -1.0, -2.0, 0.0;
  hi << 1.0, 2.0, 3.0;
  const auto box = FeasibleSet::box(lo, hi);

  Eigen::VectorXd y(3);
  y << 5.0, -3.0, 1.5;
  Eigen::VectorXd p = box.project(y);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == -2.0);
  CHECK(p[2] == 1.5);
  CHECK((box.project(p) - p).norm() == 0.0);
  CHECK(box.contains(p));
  CHECK_FALSE(box.contains(y));

  std::mt19937 rng(3);
  std::normal_distribution<double> gauss(0.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd u(3), v(3);
    for (int t = 0; t < 3; ++t) {
      u[t] = gauss(rng);
      v[t] = gauss(rng);
    }
    CHECK((box.project(u) - box.project(v)).norm() <= (u - v).norm() + 1e-14);
  }
}

TEST_CASE("whole space projection is the identity") {
  const auto all = FeasibleSet::whole_space(4);
  Eigen::VectorXd y(4);
  y << 1.0, -7.0, 3.0, 0.0;
  CHECK((all.project(y) - y).norm() == 0.0);
  CHECK(all.contains(y));
}

TEST_CASE("ball-constrained projection reference cases") {
  const auto all = FeasibleSet::whole_space(2);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(2);

  // project (3,4) onto the unit ball -> (0.6, 0.8)
  Eigen::VectorXd p = project_intersection(all, I, x, 1.0, vec2(3.0, 4.0));
  CHECK((p - vec2(0.6, 0.8)).norm() < 1e-8);

  // restricted to span(e1): the second coordinate is dropped first
  Eigen::MatrixXd Q(2, 1);
  Q << 1.0, 0.0;
  p = project_intersection(all, Q, x, 1.0, vec2(3.0, 4.0));
  CHECK((p - vec2(1.0, 0.0)).norm() < 1e-8);

  // zero-column subspace pins the result at x
  Eigen::MatrixXd Q0(2, 0);
  p = project_intersection(all, Q0, x, 1.0, vec2(3.0, 4.0));
  CHECK(p.norm() < 1e-12);

  // infinite radius drops the ball
  p = project_intersection(all, I, x, kInf, vec2(3.0, 4.0));
  CHECK((p - vec2(3.0, 4.0)).norm() < 1e-10);
}

TEST_CASE("projection onto box-ball intersection is a fixed point") {
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, -0.5);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, 0.5);
  const auto box = FeasibleSet::box(lo, hi);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(3);

  std::mt19937 rng(11);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd y(3);
    for (int t = 0; t < 3; ++t) y[t] = gauss(rng);
    Eigen::VectorXd p = project_intersection(box, I, x, 0.7, y);
    CHECK(box.contains(p, 1e-8));
    CHECK((p - x).norm() <= 0.7 + 1e-8);
    Eigen::VectorXd p2 = project_intersection(box, I, x, 0.7, p);
    CHECK((p2 - p).norm() < 1e-6);
  }
}

TEST_CASE("kernel-centered checks") {
  // whole space: always kernel-centered
  const auto all = FeasibleSet::whole_space(3);
  Eigen::MatrixXd U(1, 3);
  U << 1.0, 0.0, 0.0;
  Eigen::VectorXd b(1);
  b << 0.3;
  CHECK(is_kernel_centered(all, U, b));

  // symmetric box around a coordinate selector with b inside: centered
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, -1.0);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, 1.0);
  const auto box = FeasibleSet::box(lo, hi);
  b << 0.0;
  CHECK(is_kernel_centered(box, U, b));

  // b outside the box slice: not centered
  b << 5.0;
  CHECK_FALSE(is_kernel_centered(box, U, b));
}

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "psarp/errors.hpp"
#include "psarp/harness.hpp"
#include "psarp/problem.hpp"
#include "psarp/tensor.hpp"

using namespace psarp;

namespace {
Problem scalar_sqrt_problem() {
  // f(x) = 0 + |x|^(1/2) on R (the zero quadratic keeps the smooth maps
  // spanning, which validation requires)
  Problem p;
  p.n = 1;
  p.feasible = FeasibleSet::whole_space(1);
  SmoothElement se;
  se.U = Eigen::MatrixXd::Identity(1, 1);
  se.oracle = std::make_shared<QuadraticOracle>(Eigen::MatrixXd::Zero(1, 1),
                                                Eigen::VectorXd::Zero(1));
  se.oracle_name = "quadratic";
  p.smooth.push_back(se);
  HardElement he;
  he.U = Eigen::MatrixXd::Identity(1, 1);
  he.b = Eigen::VectorXd::Zero(1);
  he.a = 0.5;
  he.weight = 1.0;
  p.hard.push_back(he);
  return p;
}
}  // namespace

TEST_CASE("objective evaluation reference values and counters") {
  Problem p = scalar_sqrt_problem();
  Eigen::VectorXd x(1);
  x << 4.0;
  EvalCounters c;
  CHECK(evaluate_f(p, x, &c) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(c.evals_f == 1);

  // working objective over the (only) hard element
  CHECK(evaluate_f_working(p, x, {0}) == doctest::Approx(2.0).epsilon(1e-15));
  // empty working set drops it
  CHECK(evaluate_f_working(p, x, {}) == 0.0);
  // zero residual in the working set is a singularity
  x << 0.0;
  CHECK_THROWS_AS(evaluate_f_working(p, x, {0}), SingularityError);
}

TEST_CASE("validation catches structural defects") {
  Problem p = scalar_sqrt_problem();
  CHECK(p.validate().empty());

  SUBCASE("exponent out of range") {
    p.hard[0].a = 1.2;
    CHECK_FALSE(p.validate().empty());
  }
  SUBCASE("non-positive weight") {
    p.hard[0].weight = 0.0;
    CHECK_FALSE(p.validate().empty());
    CHECK_THROWS_AS(p.validate_or_throw(), DomainError);
  }
  SUBCASE("rows not orthonormal") {
    p.hard[0].U(0, 0) = 2.0;
    CHECK_FALSE(p.validate().empty());
  }
  SUBCASE("overlapping hard elements") {
    Problem q;
    q.n = 2;
    q.feasible = FeasibleSet::whole_space(2);
    HardElement h1, h2;
    h1.U = Eigen::MatrixXd::Zero(1, 2);
    h1.U(0, 0) = 1.0;
    h1.b = Eigen::VectorXd::Zero(1);
    h2.U = Eigen::MatrixXd::Zero(1, 2);
    h2.U(0, 0) = std::sqrt(0.5);
    h2.U(0, 1) = std::sqrt(0.5);
    h2.b = Eigen::VectorXd::Zero(1);
    q.hard = {h1, h2};
    CHECK_FALSE(q.validate().empty());
  }
  SUBCASE("feasible set not kernel-centered") {
    Eigen::VectorXd lo(1), hi(1);
    lo << 1.0;
    hi << 2.0;
    p.feasible = FeasibleSet::box(lo, hi);  // b = 0 outside the box slice
    CHECK_FALSE(p.validate().empty());
  }
}

TEST_CASE("norm equivalence constant of the smooth maps") {
  // a single identity map: constant is exactly 1
  Problem p;
  p.n = 3;
  p.feasible = FeasibleSet::whole_space(3);
  SmoothElement se;
  se.U = Eigen::MatrixXd::Identity(3, 3);
  se.oracle = std::make_shared<QuadraticOracle>(
      Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3));
  se.oracle_name = "quadratic";
  p.smooth.push_back(se);
  CHECK(sigma_equiv_constant(p) == doctest::Approx(1.0).epsilon(1e-12));

  // two identity copies: sigma_min(stack)/sqrt(2) = sqrt(2)/sqrt(2) = 1
  p.smooth.push_back(p.smooth[0]);
  CHECK(sigma_equiv_constant(p) == doctest::Approx(1.0).epsilon(1e-12));

  // a rank-deficient stack sees no equivalence
  Problem q;
  q.n = 2;
  q.feasible = FeasibleSet::whole_space(2);
  SmoothElement partial;
  partial.U = Eigen::MatrixXd::Zero(1, 2);
  partial.U(0, 0) = 1.0;
  partial.oracle = std::make_shared<QuadraticOracle>(
      Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1));
  partial.oracle_name = "quadratic";
  q.smooth.push_back(partial);
  CHECK(sigma_equiv_constant(q) < 1e-10);
  CHECK_FALSE(q.validate().empty());
}

TEST_CASE("quadratic and quartic oracles match finite differences") {
  std::mt19937 rng(5);
  std::normal_distribution<double> gauss;

  Eigen::MatrixXd H(3, 3);
  Eigen::VectorXd c(3), w(3);
  for (int i = 0; i < 3; ++i) {
    c[i] = gauss(rng);
    w[i] = 1.0 + std::abs(gauss(rng));
    for (int j = 0; j < 3; ++j) H(i, j) = gauss(rng);
  }
  QuadraticOracle quad(H, c);
  QuarticWellOracle well(w);

  for (const SmoothOracle* o :
       {static_cast<const SmoothOracle*>(&quad),
        static_cast<const SmoothOracle*>(&well)}) {
    for (int j = 1; j <= 3; ++j) {
      Eigen::VectorXd z(3);
      for (int t = 0; t < 3; ++t) z[t] = gauss(rng);
      std::vector<Eigen::VectorXd> dirs;
      for (int k = 0; k < j; ++k) {
        Eigen::VectorXd v(3);
        for (int t = 0; t < 3; ++t) v[t] = gauss(rng);
        dirs.push_back(v.normalized());
      }
      const double exact = o->deriv(z, j, dirs);
      // a large step is exact for polynomials and avoids round-off
      const double fd = tensor::finite_difference(
          [o](const Eigen::VectorXd& y) { return o->value(y); }, z, dirs,
          1e-2);
      CHECK(std::abs(exact - fd) <= 1e-5 * std::max(1.0, std::abs(exact)));
      // the one-slot contraction agrees with the full form
      std::vector<Eigen::VectorXd> head(dirs.begin(), dirs.end() - 1);
      const Eigen::VectorXd gv = o->deriv_vec(z, j, head);
      CHECK(gv.dot(dirs.back()) == doctest::Approx(exact).epsilon(1e-10));
    }
  }
  CHECK(quad.max_degree() == 2);
  CHECK(well.max_degree() == 4);
}

TEST_CASE("working objective sandwiches the full objective") {
  // f_W(y) <= f(y) <= f_W(y) + sum of eps^a over dropped elements, for y
  // keeping the dropped residuals inside the eps-ball
  auto gp = gen_group_lasso(3, 2, 8, 0.4, 0.5, 17);
  const Problem& p = gp.problem;
  REQUIRE(p.validate().empty());

  Eigen::VectorXd x = Eigen::VectorXd::Zero(8);
  x[6] = 0.9;
  x[7] = -0.4;  // only the last group is away from zero
  x = p.feasible.project(x);
  const double eps = 1e-3;

  std::vector<int> active;
  double dropped_bound = 0.0;
  for (int i = 0; i < static_cast<int>(p.hard.size()); ++i) {
    const double rn = p.hard[i].residual(x).norm();
    if (rn > eps)
      active.push_back(i);
    else
      dropped_bound += p.hard[i].weight * std::pow(eps, p.hard[i].a);
  }
  const double fw = evaluate_f_working(p, x, active);
  const double f = evaluate_f(p, x);
  CHECK(fw <= f + 1e-12);
  CHECK(f <= fw + dropped_bound + 1e-12);
}

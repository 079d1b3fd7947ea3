#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "psarp/errors.hpp"
#include "psarp/tensor.hpp"

using namespace psarp;
using namespace psarp::tensor;

namespace {
Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}
}  // namespace

TEST_CASE("pi_factor reference values and sign alternation") {
  CHECK(pi_factor(0.5, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pi_factor(0.5, 2) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(pi_factor(0.5, 3) == doctest::Approx(0.375).epsilon(1e-15));
  for (double a : {0.1, 0.3, 0.7, 0.9}) {
    for (int j = 1; j <= 6; ++j) {
      const double v = pi_factor(a, j);
      // sign is (-1)^(j-1) for a in (0,1)
      CHECK(v * ((j % 2 == 1) ? 1.0 : -1.0) > 0.0);
    }
  }
  CHECK_THROWS_AS(pi_factor(0.5, 0), DomainError);
  CHECK_THROWS_AS(pi_factor(1.5, 1), DomainError);
}

TEST_CASE("coefficient rows and phi sum identity") {
  // mu_{2,1} = 1, mu_{2,2} = 1 (first rows of the recursion)
  const auto& row2 = mu_row(2);
  REQUIRE(row2.size() == 2);
  CHECK(row2[0] == 1.0);
  CHECK(row2[1] == 1.0);
  // sum_i phi_{i,j} = pi(a-j), exactly as computed
  for (double a : {0.1, 0.5, 0.9}) {
    for (int j = 1; j <= 8; ++j) {
      const auto phi = phi_coefficients(a, j);
      REQUIRE(static_cast<int>(phi.size()) == j);
      double s = 0.0;
      for (double c : phi) s += c;
      CHECK(s == doctest::Approx(pi_factor(a, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("normpow_derivative reference values") {
  // gradient of ||r||^a along r/||r|| at unit r is a
  Eigen::VectorXd r = vec2(1.0, 0.0);
  std::vector<Eigen::VectorXd> d1{vec2(1.0, 0.0)};
  CHECK(normpow_derivative(r, 0.5, 1, d1) ==
        doctest::Approx(0.5).epsilon(1e-14));

  // second derivative at r=(0,2), a=1/2, both directions e2:
  // pi(a-2) ||r||^(a-2) = -1/4 * 2^(-3/2)
  r = vec2(0.0, 2.0);
  std::vector<Eigen::VectorXd> d2{vec2(0.0, 1.0), vec2(0.0, 1.0)};
  CHECK(normpow_derivative(r, 0.5, 2, d2) ==
        doctest::Approx(-0.08838834764831845).epsilon(1e-12));

  CHECK_THROWS_AS(normpow_derivative(vec2(0.0, 0.0), 0.5, 1, d1),
                  SingularityError);
}

TEST_CASE("normpow_derivative matches finite differences") {
  std::mt19937 rng(42);
  std::normal_distribution<double> gauss;
  for (double a : {0.3, 0.5, 0.8}) {
    for (int j = 1; j <= 3; ++j) {
      for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd r(3);
        for (int t = 0; t < 3; ++t) r[t] = gauss(rng);
        if (r.norm() < 0.5) r *= 0.5 / r.norm() * 3.0;
        std::vector<Eigen::VectorXd> dirs;
        for (int k = 0; k < j; ++k) {
          Eigen::VectorXd v(3);
          for (int t = 0; t < 3; ++t) v[t] = gauss(rng);
          dirs.push_back(v.normalized());
        }
        const double exact = normpow_derivative(r, a, j, dirs);
        const double fd = finite_difference(
            [a](const Eigen::VectorXd& z) { return std::pow(z.norm(), a); },
            r, dirs);
        CHECK(std::abs(exact - fd) <=
              1e-5 * std::max(1.0, std::abs(exact)));
      }
    }
  }
}

TEST_CASE("tensor norm value, attainment and homogeneity") {
  Eigen::VectorXd r(3);
  r << 0.0, 0.0, 2.0;
  // |pi(a-2)| ||r||^(a-2) at a = 1/2
  CHECK(normpow_tensor_norm(r, 0.5, 2) ==
        doctest::Approx(0.25 * std::pow(2.0, -1.5)).epsilon(1e-14));

  // attained on the diagonal direction r/||r||
  std::vector<Eigen::VectorXd> dirs{r.normalized(), r.normalized()};
  CHECK(std::abs(normpow_derivative(r, 0.5, 2, dirs)) ==
        doctest::Approx(normpow_tensor_norm(r, 0.5, 2)).epsilon(1e-12));

  // degree-(a-j) positive homogeneity in ||r||
  for (int j = 1; j <= 4; ++j) {
    const double n1 = normpow_tensor_norm(r, 0.5, j);
    const double n2 = normpow_tensor_norm(2.0 * r, 0.5, j);
    CHECK(n2 == doctest::Approx(n1 * std::pow(2.0, 0.5 - j)).epsilon(1e-13));
  }
}

namespace {
// Independent bound on |grad^j ||r||^a [v1..vj]| over unit directions: the
// diagonal value depends only on t = r.v/||r|| through the 1-D polynomial
// sum_i phi_{i,j} t^(2i-j), and the symmetric-tensor maximum equals the
// diagonal maximum.
double true_diagonal_max(const Eigen::VectorXd& r, double a, int j) {
  const auto phi = phi_coefficients(a, j);
  double best = 0.0;
  for (int k = 0; k <= 100000; ++k) {
    const double t = -1.0 + 2.0 * k / 100000.0;
    double h = 0.0;
    for (int i = 1; i <= j; ++i) {
      const int pw = 2 * i - j;
      if (pw < 0 || phi[i - 1] == 0.0) continue;
      h += phi[i - 1] * std::pow(t, pw);
    }
    best = std::max(best, std::abs(h));
  }
  return best * std::pow(r.norm(), a - j);
}
}  // namespace

TEST_CASE("sampled directions never exceed the true induced tensor norm") {
  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd r(4);
  r << 1.0, -2.0, 0.5, 3.0;
  for (int j = 1; j <= 3; ++j) {
    const double bound = true_diagonal_max(r, 0.5, j);
    // the closed-form radial value never exceeds the true maximum, and the
    // two coincide for the gradient
    CHECK(normpow_tensor_norm(r, 0.5, j) <= bound + 1e-12);
    if (j == 1)
      CHECK(normpow_tensor_norm(r, 0.5, 1) ==
            doctest::Approx(bound).epsilon(1e-9));
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<Eigen::VectorXd> dirs;
      for (int k = 0; k < j; ++k) {
        Eigen::VectorXd v(4);
        for (int t = 0; t < 4; ++t) v[t] = gauss(rng);
        dirs.push_back(v.normalized());
      }
      CHECK(std::abs(normpow_derivative(r, 0.5, j, dirs)) <= bound + 1e-10);
    }
  }
}

TEST_CASE("gradient and hessian helpers agree with the multilinear forms") {
  Eigen::VectorXd r(3);
  r << 1.0, 2.0, -1.0;
  const double a = 0.4;
  const Eigen::VectorXd g = normpow_gradient(r, a);
  const Eigen::MatrixXd H = normpow_hessian(r, a);
  for (int t = 0; t < 3; ++t) {
    std::vector<Eigen::VectorXd> d1{Eigen::VectorXd::Unit(3, t)};
    CHECK(g[t] == doctest::Approx(normpow_derivative(r, a, 1, d1))
                      .epsilon(1e-13));
    for (int u = 0; u < 3; ++u) {
      std::vector<Eigen::VectorXd> d2{Eigen::VectorXd::Unit(3, t),
                                      Eigen::VectorXd::Unit(3, u)};
      CHECK(H(t, u) == doctest::Approx(normpow_derivative(r, a, 2, d2))
                           .epsilon(1e-13));
    }
  }
}

TEST_CASE("finite_difference sanity on a quadratic") {
  auto f = [](const Eigen::VectorXd& z) { return z.squaredNorm(); };
  Eigen::VectorXd x = vec2(1.0, 1.0);
  std::vector<Eigen::VectorXd> d1{vec2(1.0, 0.0)};
  CHECK(finite_difference(f, x, d1) == doctest::Approx(2.0).epsilon(1e-8));
  std::vector<Eigen::VectorXd> d2{vec2(1.0, 0.0), vec2(1.0, 0.0)};
  CHECK(finite_difference(f, x, d2) == doctest::Approx(2.0).epsilon(1e-6));
  std::vector<Eigen::VectorXd> d3{vec2(1.0, 0.0), vec2(1.0, 0.0),
                                  vec2(1.0, 0.0)};
  CHECK(std::abs(finite_difference(f, x, d3)) < 1e-4);
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Core>
#include <json.hpp>

#include "psarp/harness.hpp"
#include "psarp/json_io.hpp"
#include "psarp/solver.hpp"

using namespace psarp;

TEST_CASE("generated problems are structurally valid and reproducible") {
  auto g1 = gen_group_lasso(5, 4, 20, 0.5, 0.5, 7);
  CHECK(g1.problem.validate().empty());
  CHECK(g1.problem.n == 20);
  CHECK(g1.problem.smooth.size() == 1);
  CHECK(g1.problem.hard.size() == 5);
  CHECK(g1.problem.feasible.contains(g1.x0));

  auto g2 = gen_group_lasso(5, 4, 20, 0.5, 0.5, 7);
  CHECK((g1.x0 - g2.x0).norm() == 0.0);
  const auto* q1 = dynamic_cast<const QuadraticOracle*>(
      g1.problem.smooth[0].oracle.get());
  const auto* q2 = dynamic_cast<const QuadraticOracle*>(
      g2.problem.smooth[0].oracle.get());
  REQUIRE(q1 != nullptr);
  REQUIRE(q2 != nullptr);
  CHECK((q1->H() - q2->H()).norm() == 0.0);

  auto r1 = gen_row_sparse_regression(3, 2, 4, 0.3, 0.5, 11);
  CHECK(r1.problem.validate().empty());
  CHECK(r1.problem.n == 6);            // nu * gamma
  CHECK(r1.problem.smooth.size() == 2);  // one per column
  CHECK(r1.problem.hard.size() == 3);    // one per row
}

TEST_CASE("row-sparse recovery freezes the rows absent from the target") {
  // target X has only its first row nonzero; with a small penalty the
  // solver should zero out the remaining rows
  auto gp = gen_row_sparse_regression(3, 2, 4, 0.2, 0.5, 19);
  SolverConfig cfg;
  cfg.eps = 1e-4;
  auto rep = solve(gp.problem, gp.x0, cfg);
  REQUIRE(rep.status == SolveStatus::Converged);
  int frozen_rows = 0;
  for (const auto& he : gp.problem.hard)
    if (he.residual(rep.x).norm() <= cfg.eps) ++frozen_rows;
  CHECK(frozen_rows >= 1);
  std::vector<std::string> why;
  CHECK(rep.ledger.check(gp.problem, &why));
}

TEST_CASE("sweeps are deterministic and their CSV is stable") {
  Experiment ex;
  ex.generated = gen_group_lasso(2, 2, 4, 0.5, 0.5, 7);
  ex.eps_values = {1e-1, 1e-2};
  ex.config = SolverConfig{};

  auto rep1 = run_sweep(ex);
  auto rep2 = run_sweep(ex);
  REQUIRE(rep1.points.size() == 2);
  CHECK(sweep_to_csv(rep1) == sweep_to_csv(rep2));
  CHECK(rep1.theoretical_exponent ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK_FALSE(rep1.slope.has_value());  // fewer than 3 points

  const std::string csv = sweep_to_csv(rep1);
  CHECK(csv.rfind("eps,succ,unsucc,evals_f,evals_der,psi_final\n", 0) == 0);
  for (const auto& pt : rep1.points) {
    CHECK(pt.converged);
    CHECK(pt.psi_final <= pt.eps);
  }
}

TEST_CASE("problem JSON round trip preserves evaluation") {
  auto gp = gen_group_lasso(2, 3, 6, 0.4, 0.5, 29);
  nlohmann::json j = problem_to_json(gp.problem);
  Problem back = problem_from_json(j);
  CHECK(back.validate().empty());
  CHECK(back.n == gp.problem.n);
  Eigen::VectorXd x = gp.x0;
  x[0] += 0.1;
  x = gp.problem.feasible.project(x);
  CHECK(evaluate_f(back, x) ==
        doctest::Approx(evaluate_f(gp.problem, x)).epsilon(1e-12));
}

TEST_CASE("run log lines carry the required fields") {
  auto gp = gen_group_lasso(2, 2, 4, 0.5, 0.5, 7);
  SolverConfig cfg;
  cfg.eps = 1e-2;
  auto rep = solve(gp.problem, gp.x0, cfg);
  REQUIRE(rep.status == SolveStatus::Converged);

  std::ostringstream os;
  write_run_log(os, rep.ledger);
  std::istringstream is(os.str());
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    for (const char* key : {"k", "success", "rho", "norm_s", "f", "psi",
                            "sigma_max", "frozen", "class"})
      CHECK(j.contains(key));
    const std::string cls = j["class"].get<std::string>();
    CHECK((cls == "S_eps" || cls == "S_s" || cls == "S_heart" || cls == "U"));
    ++lines;
  }
  CHECK(lines == rep.iterations);
}

#pragma once

// Experiment drivers: reproducible problem generators for the two worked
// problem families, accuracy sweeps with complexity-slope fitting, and CSV /
// JSON report emission.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "psarp/problem.hpp"
#include "psarp/solver.hpp"

namespace psarp {

struct GeneratedProblem {
  Problem problem;
  Eigen::VectorXd x0;
};

// Group-sparse regression: one full-space quadratic 1/2||Hx - y||^2 with a
// well-conditioned random H (condition number <= 10), disjoint coordinate
// groups as hard elements (b = 0, weight = lambda), and a box containing 0.
GeneratedProblem gen_group_lasso(int groups, int group_size, int n,
                                 double lambda, double a, unsigned seed);

// Row-sparse multi-output regression on X in R^{nu x gamma} (vectorized
// row-major): per-column quadratics 1/2||H X_col - B_col||^2 as smooth
// elements, row selectors as hard elements (b = 0, weight = lambda), whole
// space feasible set.
GeneratedProblem gen_row_sparse_regression(int nu, int gamma, int kappa_rows,
                                           double lambda, double a,
                                           unsigned seed);

struct Experiment {
  GeneratedProblem generated;
  std::vector<double> eps_values;  // strictly decreasing, in (0,1]
  SolverConfig config;             // eps field overridden per sweep point
  std::string csv_path;            // empty: no CSV written
};

struct SweepPoint {
  double eps = 0.0;
  int successful = 0;
  int unsuccessful = 0;
  long evals_f = 0;
  long evals_derivative = 0;
  double psi_final = 0.0;
  double runtime_seconds = 0.0;
  bool converged = false;
  std::string error;  // nonempty when the solve failed
  SolverReport report;
};

struct SweepReport {
  std::vector<SweepPoint> points;
  std::optional<double> slope;  // OLS slope of log|S| vs log(1/eps),
                                // present only with >= 3 converged points
  double theoretical_exponent = 0.0;  // (p+1)/(p-q+1)
};

// Fresh solve per accuracy from the same starting point; failures are
// recorded and the sweep continues.
SweepReport run_sweep(const Experiment& experiment);

// Deterministic CSV: header eps,succ,unsucc,evals_f,evals_der,psi_final.
std::string sweep_to_csv(const SweepReport& report);
nlohmann::json sweep_to_json(const SweepReport& report);

}  // namespace psarp

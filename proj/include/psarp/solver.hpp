#pragma once

// Outer adaptive-regularization loop: termination on the criticality
// measure, trial steps from the subsolver, ratio-based acceptance,
// per-element regularization-weight updates, and a per-run ledger with
// iteration classification and complexity diagnostics.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "psarp/criticality.hpp"
#include "psarp/problem.hpp"
#include "psarp/subsolver.hpp"

namespace psarp {

struct SolverConfig {
  int p = 3;
  int q = 1;
  double eps = 1e-4;
  double delta = 1.0;  // fixed trust ball for the measures
  double gamma0 = 0.5;
  double gamma1 = 2.0;
  double gamma2 = 4.0;
  double eta = 0.1;
  double theta = 0.5;
  double varpi = 0.5;
  double sigma0 = 1.0;
  double sigma_min = 1e-8;
  double kappa_big = 2.0;
  int max_iterations = 10000;
  int max_inner_iterations = 10000;

  // Enforces all parameter ranges; needs the problem to know whether even
  // degrees are admissible (they are only when there is no hard element).
  void validate(const Problem& problem) const;
};

enum class SolveStatus { Converged, ModelCriticalStop, IterationCap };

struct IterationRecord {
  int k = 0;
  bool success = false;
  double rho = 0.0;
  double norm_s = 0.0;
  double f = 0.0;      // objective at the end of the iteration
  double psi = 0.0;    // criticality measure at the start of the iteration
  double delta_f = 0.0;
  double delta_T = 0.0;
  double sigma_max = 0.0;           // largest weight after the update
  std::vector<int> frozen;          // hard residuals fixed during this step
  std::string category;             // "S_eps" | "S_s" | "S_heart" | "U"
  std::string exit;                 // "long" | "critical"
  std::vector<double> res_before;   // hard residual norms at x_k
  std::vector<double> res_after;    // hard residual norms at x_k + s_k
  std::vector<char> sigma_increased;  // per smooth element
};

struct Ledger {
  std::vector<IterationRecord> records;
  int n_smooth = 0;
  int n_hard = 0;
  double eps = 0.0;
  int p = 0, q = 0;
  double eta = 0.0, gamma0 = 0.0, gamma1 = 0.0, gamma2 = 0.0;
  double sigma_min = 0.0, sigma0 = 0.0;
  double varsigma = 0.0;        // norm-equivalence constant of the smooth maps
  double kappa_N = 0.0;         // sampled bound on smooth derivative norms
  double sigma_max_observed = 0.0;
  double omega = 0.0;           // forbidden-interval upper end
  double alpha = 0.0;           // 3/4 omega
  double L_alpha = 0.0;         // Lipschitz diagnostic at distance alpha
  double kappa_a = 0.0;         // iteration-count constants
  double kappa_b = 0.0;
  double kappa_heart = 0.0;
  double kappa_S = 0.0;

  int count(const std::string& category) const;
  int successful() const;
  int unsuccessful() const;

  // Verifies the recorded run against the counting and decrease laws:
  // the S_eps/S_s/S_heart split partitions the successes, |S_eps| <= n_hard,
  // total iterations <= kappa_a |S| + kappa_b, the guaranteed model decrease
  // per success, the regularization-weight cap on elements with known
  // Lipschitz constants, and the forbidden residual interval (eps, omega)
  // for short accepted steps.  Appends one message per violation.
  bool check(const Problem& problem, std::vector<std::string>* why) const;
};

struct SolverReport {
  Eigen::VectorXd x;
  double f = 0.0;
  double psi_final = 0.0;
  SolveStatus status = SolveStatus::IterationCap;
  int iterations = 0;
  EvalCounters counters;
  std::vector<double> sigma_final;
  Ledger ledger;
};

// omega = min[a/16, (a / (12 |N| (kappa_N + sigma_max/(p-q+1)!)))^{1/(1-a)}].
double compute_omega(double a, int n_smooth, double kappa_N, double sigma_max,
                     int p, int q);

// Acceptance test: rho = delta_f / delta_T >= eta.  delta_T must be positive.
bool accept_step(double delta_f, double delta_T, double eta);

SolverReport solve(const Problem& problem, const Eigen::VectorXd& x0,
                   const SolverConfig& config);

}  // namespace psarp

#pragma once

// Inner solvers: minimization of low-degree polynomials over the intersection
// of a ball, the feasible set and a subspace (used by the criticality
// measures), and the projected-gradient descent on the regularized model that
// produces trial steps.

#include <functional>
#include <optional>

#include <Eigen/Core>

#include "psarp/model.hpp"
#include "psarp/problem.hpp"

namespace psarp {

struct TaylorMinResult {
  Eigen::VectorXd d;     // minimizer (full-space coordinates)
  double decrease = 0.0;  // attained objective value (<= 0)
  bool exact = true;
};

// min g.d + [H] 1/2 d.H.d  over  {x + d in F, ||d|| <= delta, d in range(Q)}.
// Linear objectives (H absent) are solved in closed form on the whole space
// and by projected gradient otherwise; quadratic objectives use an exact
// trust-region solve when the ball is the only binding constraint and a
// multi-start projected gradient otherwise.  `decrease` is the attained
// value of the objective (<= 0); `exact` marks certified global minima.
TaylorMinResult minimize_taylor(const Eigen::VectorXd& g,
                                const std::optional<Eigen::MatrixXd>& H,
                                const FeasibleSet& set,
                                const Eigen::MatrixXd& Q,
                                const Eigen::VectorXd& x, double delta);

// Exact minimizer of 1/2 d.H.d + g.d over ||d|| <= delta (eigendecomposition
// plus a safeguarded secular-equation solve; handles the hard case).
Eigen::VectorXd trust_region_exact(const Eigen::MatrixXd& H,
                                   const Eigen::VectorXd& g, double delta);

enum class StepExit {
  LongStep,       // ||s|| passed the long-step threshold
  ModelCritical,  // model measure fell below its adaptive tolerance
  NoDescentStep,  // no descent step exists (internal error for order <= 2)
};

struct StepResult {
  Eigen::VectorXd s;            // accepted trial displacement
  StepExit exit;
  std::vector<int> frozen_now;  // hard elements whose residuals were fixed
                                // to zero while computing this step
  double model_decrease = 0.0;  // m(0) - m(s) over the working elements
  double psi_model = 0.0;       // model measure at s (ModelCritical only)
  int pg_iterations = 0;
};

struct StepParams {
  double eps = 1e-4;
  int q = 1;
  double delta = 1.0;
  double theta = 0.5;
  double varpi = 0.5;   // long-step factor
  int p = 3;
  double armijo = 1e-4;
  int max_pg_iterations = 10000;
};

// Computes a trial step for the model anchored at model.base_point():
// projected gradient with Armijo backtracking on m over
// {x + s in F, s in range(Q)}, freezing (snapping to zero) any hard residual
// that enters the epsilon-ball along the way and shrinking Q accordingly.
// `hard_active` of the model is updated through `active_mask`.
StepResult compute_step(const Problem& problem, FullModel& model,
                        Eigen::MatrixXd Q, std::vector<char>& active_mask,
                        const StepParams& params,
                        EvalCounters* counters = nullptr);

}  // namespace psarp

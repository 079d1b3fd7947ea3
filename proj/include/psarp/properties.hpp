#pragma once

// Randomized property suites over the numerical kernels, shared by the unit
// tests, the acceptance harness and the `check` CLI subcommand.  Each suite
// prints a short summary to the given stream and returns true on success.

#include <iosfwd>
#include <optional>

#include <Eigen/Core>

#include "psarp/feasible.hpp"

namespace psarp {

// Derivative-tensor formulas vs. finite differences, coefficient-sum
// identity, and the sampled tensor-norm maximization.
bool run_tensor_suite(std::ostream& os);

// Overestimation and concavity of the isotropic surrogate, derivative sign
// bounds, and the explicit-rotation equivalence.
bool run_model_suite(std::ostream& os);

// Criticality measures against closed forms and a grid oracle.
bool run_criticality_suite(std::ostream& os);

// Full solver runs on both generator families with every ledger law checked.
bool run_ledger_suite(std::ostream& os);

// Brute-force minimizer of g.d + 1/2 d.H.d over
// {x + d in F, ||d|| <= delta, d in range(Q)} by staged grid refinement in
// the reduced coordinates (Q.cols() <= 3).
double grid_min_taylor(const Eigen::VectorXd& g,
                       const std::optional<Eigen::MatrixXd>& H,
                       const FeasibleSet& set, const Eigen::MatrixXd& Q,
                       const Eigen::VectorXd& x, double delta);

}  // namespace psarp

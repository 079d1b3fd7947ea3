#pragma once

// Epsilon-activity classification of the non-Lipschitz elements and the
// constrained q-th order criticality measure psi used both for termination
// and for the inner-step stopping rule.

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "psarp/model.hpp"
#include "psarp/problem.hpp"

namespace psarp {

// chi(delta) = sum_{l=1}^q delta^l / l!, the scaling of psi.
double chi(int q, double delta);

struct Classification {
  std::vector<int> critical;  // hard i with ||r_i(x)|| <= eps
  std::vector<int> active;    // the remaining hard indices
  // Orthonormal basis of the intersection of ker(U_i) over critical i
  // (identity when no element is critical).  Directions in this subspace
  // leave every near-zero residual untouched.
  Eigen::MatrixXd Q;
};

Classification classify(const Problem& problem, const Eigen::VectorXd& x,
                        double eps);

struct MeasureResult {
  double psi = 0.0;
  double chi_value = 0.0;
  Eigen::VectorXd d;  // inner minimizer achieving the measure
  bool exact = true;  // false when the inner solve is only approximate
};

// psi = q0 - min { q0 + g.d + [q==2] 1/2 d.H.d :
//                  x + d feasible, ||d|| <= delta, d in range(Q) }.
// Nonnegative by construction (d = 0 is admissible).
MeasureResult psi_from_derivatives(const Eigen::VectorXd& g,
                                   const std::optional<Eigen::MatrixXd>& H,
                                   const FeasibleSet& set,
                                   const Eigen::MatrixXd& Q,
                                   const Eigen::VectorXd& x, int q,
                                   double delta);

// Gradient (and Hessian for q = 2) of the working objective
// f_W = smooth part + active hard part at x, pulled back through the U_i.
Eigen::VectorXd working_gradient(const Problem& problem,
                                 const Eigen::VectorXd& x,
                                 const std::vector<int>& active_hard,
                                 EvalCounters* counters = nullptr);
Eigen::MatrixXd working_hessian(const Problem& problem,
                                const Eigen::VectorXd& x,
                                const std::vector<int>& active_hard,
                                EvalCounters* counters = nullptr);

// Criticality measure of the objective at x.
MeasureResult psi_measure(const Problem& problem, const Eigen::VectorXd& x,
                          double eps, int q, double delta,
                          EvalCounters* counters = nullptr);

// Criticality measure of the step model at displacement s, restricted to the
// subspace spanned by Q (kernels of the elements near-critical at x + s).
MeasureResult psi_model_measure(const FullModel& model,
                                const Eigen::VectorXd& s,
                                const Eigen::MatrixXd& Q, int q, double delta);

}  // namespace psarp

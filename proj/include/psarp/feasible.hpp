#pragma once

// Kernel-centered convex feasible sets: the whole space and coordinate boxes.
// Both admit exact projections; intersections with balls and subspaces are
// handled by Dykstra's alternating projection scheme.

#include <limits>

#include <Eigen/Core>

namespace psarp {

class FeasibleSet {
 public:
  enum class Kind { WholeSpace, Box };

  static FeasibleSet whole_space(int n);
  static FeasibleSet box(Eigen::VectorXd lo, Eigen::VectorXd hi);

  Kind kind() const { return kind_; }
  bool is_whole() const { return kind_ == Kind::WholeSpace; }
  int dim() const { return n_; }
  const Eigen::VectorXd& lower() const { return lo_; }
  const Eigen::VectorXd& upper() const { return hi_; }

  // argmin_{z in F} ||z - y||; componentwise clamp for boxes.  Idempotent.
  Eigen::VectorXd project(const Eigen::VectorXd& y) const;
  bool contains(const Eigen::VectorXd& y, double tol = 1e-10) const;

 private:
  FeasibleSet(Kind kind, int n, Eigen::VectorXd lo, Eigen::VectorXd hi);

  Kind kind_;
  int n_;
  Eigen::VectorXd lo_, hi_;
};

// Projection of y onto {x + d : x + d in F, ||d|| <= delta, d in range(Q)}
// by Dykstra alternating projections on the three sets.  Q must have
// orthonormal columns (it may have zero columns, meaning d = 0).
// Pass delta = +infinity to drop the ball constraint.
// Throws NoConvergenceError (carrying the best iterate) after max_sweeps.
Eigen::VectorXd project_intersection(const FeasibleSet& set,
                                     const Eigen::MatrixXd& Q,
                                     const Eigen::VectorXd& x, double delta,
                                     const Eigen::VectorXd& y,
                                     double tol = 1e-10, int max_sweeps = 5000);

// Kernel-centered check for a single hard-element row map (orthonormal rows):
// U^+ b + P_ker(U)[F] must be contained in F whenever b lies in U F.
// Exact for WholeSpace and for boxes with coordinate-selector U; Monte-Carlo
// (num_samples points, seeded) otherwise.
bool is_kernel_centered(const FeasibleSet& set, const Eigen::MatrixXd& U,
                        const Eigen::VectorXd& b, int num_samples = 10000,
                        unsigned seed = 0);

}  // namespace psarp

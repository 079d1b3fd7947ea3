#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace psarp {

// Argument outside its documented range (exponent, order, tolerance...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evaluation requested at (or too close to) a non-Lipschitz singularity.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative routine exhausted its budget.  Carries the best iterate seen
// and the residual it stopped at so callers can inspect or salvage it.
class NoConvergenceError : public std::runtime_error {
 public:
  NoConvergenceError(const std::string& what, Eigen::VectorXd best, double residual)
      : std::runtime_error(what), best_(std::move(best)), residual_(residual) {}

  const Eigen::VectorXd& best() const { return best_; }
  double residual() const { return residual_; }

 private:
  Eigen::VectorXd best_;
  double residual_;
};

}  // namespace psarp

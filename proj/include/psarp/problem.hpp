#pragma once

// Problem data for partially separable minimization
//   f(x) = sum_i f_i(U_i x)  +  sum_i w_i ||U_i x - b_i||^{a_i},   a_i in (0,1),
// over a kernel-centered convex feasible set.  Smooth elements carry a
// derivative oracle; "hard" elements are the non-Lipschitz norm powers.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "psarp/feasible.hpp"

namespace psarp {

// Counters for objective / derivative oracle calls.
struct EvalCounters {
  long evals_f = 0;
  long evals_derivative = 0;
};

// A p-times continuously differentiable element function given by value and
// multilinear derivative forms D^j f(z)[d_1,...,d_j].
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;

  virtual double value(const Eigen::VectorXd& z) const = 0;

  // Multilinear form of the j-th derivative tensor applied to dirs (size j).
  virtual double deriv(const Eigen::VectorXd& z, int j,
                       std::span<const Eigen::VectorXd> dirs) const = 0;

  // Contraction leaving one slot free (dirs has j-1 entries); the default
  // evaluates deriv against every basis vector.
  virtual Eigen::VectorXd deriv_vec(const Eigen::VectorXd& z, int j,
                                    std::span<const Eigen::VectorXd> dirs) const;

  // Contraction leaving two slots free (dirs has j-2 entries).
  virtual Eigen::MatrixXd deriv_mat(const Eigen::VectorXd& z, int j,
                                    std::span<const Eigen::VectorXd> dirs) const;

  // Highest degree with a nonzero derivative tensor, or -1 if unbounded.
  virtual int max_degree() const { return -1; }
};

// f(z) = 1/2 ||H z - c||^2.
class QuadraticOracle : public SmoothOracle {
 public:
  QuadraticOracle(Eigen::MatrixXd H, Eigen::VectorXd c);

  double value(const Eigen::VectorXd& z) const override;
  double deriv(const Eigen::VectorXd& z, int j,
               std::span<const Eigen::VectorXd> dirs) const override;
  Eigen::VectorXd deriv_vec(const Eigen::VectorXd& z, int j,
                            std::span<const Eigen::VectorXd> dirs) const override;
  Eigen::MatrixXd deriv_mat(const Eigen::VectorXd& z, int j,
                            std::span<const Eigen::VectorXd> dirs) const override;
  int max_degree() const override { return 2; }

  const Eigen::MatrixXd& H() const { return H_; }
  const Eigen::VectorXd& c() const { return c_; }

 private:
  Eigen::MatrixXd H_;
  Eigen::VectorXd c_;
  Eigen::MatrixXd HtH_;
};

// Separable nonconvex double well f(z) = 1/4 sum_t (z_t^2 - w_t)^2.
class QuarticWellOracle : public SmoothOracle {
 public:
  explicit QuarticWellOracle(Eigen::VectorXd w);

  double value(const Eigen::VectorXd& z) const override;
  double deriv(const Eigen::VectorXd& z, int j,
               std::span<const Eigen::VectorXd> dirs) const override;
  Eigen::VectorXd deriv_vec(const Eigen::VectorXd& z, int j,
                            std::span<const Eigen::VectorXd> dirs) const override;
  Eigen::MatrixXd deriv_mat(const Eigen::VectorXd& z, int j,
                            std::span<const Eigen::VectorXd> dirs) const override;
  int max_degree() const override { return 4; }

  const Eigen::VectorXd& w() const { return w_; }

 private:
  Eigen::VectorXd w_;
};

// Adapter around user-supplied callables.
class CallbackOracle : public SmoothOracle {
 public:
  using ValueFn = std::function<double(const Eigen::VectorXd&)>;
  using DerivFn = std::function<double(const Eigen::VectorXd&, int,
                                       std::span<const Eigen::VectorXd>)>;

  CallbackOracle(ValueFn value, DerivFn deriv, int max_degree = -1);

  double value(const Eigen::VectorXd& z) const override;
  double deriv(const Eigen::VectorXd& z, int j,
               std::span<const Eigen::VectorXd> dirs) const override;
  int max_degree() const override { return max_degree_; }

 private:
  ValueFn value_;
  DerivFn deriv_;
  int max_degree_;
};

struct SmoothElement {
  Eigen::MatrixXd U;  // orthonormal rows
  std::shared_ptr<SmoothOracle> oracle;
  std::string oracle_name;   // serialization tag ("quadratic", ...)
  // Known Lipschitz constant of the p-th derivative when available
  // (diagnostics only); negative means unknown.
  double lipschitz_p = -1.0;
};

struct HardElement {
  Eigen::MatrixXd U;  // orthonormal rows
  Eigen::VectorXd b;
  double a = 0.5;       // exponent in (0,1)
  double weight = 1.0;  // positive scale factor

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const { return U * x - b; }
  double value(const Eigen::VectorXd& x) const;
};

struct Problem {
  int n = 0;
  std::vector<SmoothElement> smooth;
  std::vector<HardElement> hard;
  FeasibleSet feasible = FeasibleSet::whole_space(1);

  // Structural checks: dimensions, orthonormal rows, pairwise orthogonality
  // of the hard row maps, exponents in (0,1), positive weights, full column
  // rank of the stacked smooth maps, and kernel-centeredness of the feasible
  // set.  Returns one message per violation; empty means valid.  Never throws.
  std::vector<std::string> validate() const;

  // Convenience wrapper raising DomainError with all messages joined.
  void validate_or_throw() const;
};

// Smallest singular value of the stacked smooth row maps divided by
// sqrt(#smooth elements); positive iff the smooth maps jointly see every
// direction of R^n.
double sigma_equiv_constant(const Problem& problem);

// Full objective value; bumps counters if provided.
double evaluate_f(const Problem& problem, const Eigen::VectorXd& x,
                  EvalCounters* counters = nullptr);

// Objective restricted to the given element subsets.  Raises
// SingularityError if a listed hard element has a (near-)zero residual.
double evaluate_f_working(const Problem& problem, const Eigen::VectorXd& x,
                          const std::vector<int>& hard_subset,
                          EvalCounters* counters = nullptr);

}  // namespace psarp

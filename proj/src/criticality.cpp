#include "psarp/criticality.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "psarp/errors.hpp"
#include "psarp/subsolver.hpp"
#include "psarp/tensor.hpp"

namespace psarp {

double chi(int q, double delta) {
  if (q < 1) throw DomainError("chi requires q >= 1");
  if (!(delta > 0.0)) throw DomainError("chi requires delta > 0");
  double sum = 0.0;
  double term = 1.0;
  for (int l = 1; l <= q; ++l) {
    term *= delta / l;
    sum += term;
  }
  return sum;
}

Classification classify(const Problem& problem, const Eigen::VectorXd& x,
                        double eps) {
  if (!(eps > 0.0)) throw DomainError("classify requires eps > 0");
  Classification cls;
  Eigen::Index crit_rows = 0;
  for (size_t i = 0; i < problem.hard.size(); ++i) {
    if (problem.hard[i].residual(x).norm() <= eps) {
      cls.critical.push_back(static_cast<int>(i));
      crit_rows += problem.hard[i].U.rows();
    } else {
      cls.active.push_back(static_cast<int>(i));
    }
  }
  const Eigen::Index n = x.size();
  if (cls.critical.empty()) {
    cls.Q = Eigen::MatrixXd::Identity(n, n);
    return cls;
  }
  Eigen::MatrixXd stacked(crit_rows, n);
  Eigen::Index at = 0;
  for (int i : cls.critical) {
    stacked.middleRows(at, problem.hard[i].U.rows()) = problem.hard[i].U;
    at += problem.hard[i].U.rows();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  svd.setThreshold(1e-12);
  const Eigen::Index rank = svd.rank();
  cls.Q = svd.matrixV().rightCols(n - rank);
  return cls;
}

MeasureResult psi_from_derivatives(const Eigen::VectorXd& g,
                                   const std::optional<Eigen::MatrixXd>& H,
                                   const FeasibleSet& set,
                                   const Eigen::MatrixXd& Q,
                                   const Eigen::VectorXd& x, int q,
                                   double delta) {
  if (q < 1 || q > 2) throw DomainError("criticality order must be 1 or 2");
  if (q == 2 && !H.has_value())
    throw DomainError("second-order measure needs a Hessian");
  TaylorMinResult tm =
      minimize_taylor(g, q == 2 ? H : std::nullopt, set, Q, x, delta);
  MeasureResult mr;
  mr.psi = std::max(0.0, -tm.decrease);
  mr.chi_value = chi(q, delta);
  mr.d = tm.d;
  mr.exact = tm.exact;
  return mr;
}

Eigen::VectorXd working_gradient(const Problem& problem,
                                 const Eigen::VectorXd& x,
                                 const std::vector<int>& active_hard,
                                 EvalCounters* counters) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (const auto& el : problem.smooth) {
    const Eigen::VectorXd z = el.U * x;
    g += el.U.transpose() * el.oracle->deriv_vec(z, 1, {});
  }
  for (int i : active_hard) {
    const auto& el = problem.hard[i];
    g += el.weight *
         (el.U.transpose() * tensor::normpow_gradient(el.residual(x), el.a));
  }
  if (counters) counters->evals_derivative += 1;
  return g;
}

Eigen::MatrixXd working_hessian(const Problem& problem,
                                const Eigen::VectorXd& x,
                                const std::vector<int>& active_hard,
                                EvalCounters* counters) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (const auto& el : problem.smooth) {
    const Eigen::VectorXd z = el.U * x;
    H += el.U.transpose() * el.oracle->deriv_mat(z, 2, {}) * el.U;
  }
  for (int i : active_hard) {
    const auto& el = problem.hard[i];
    H += el.weight * (el.U.transpose() *
                      tensor::normpow_hessian(el.residual(x), el.a) * el.U);
  }
  if (counters) counters->evals_derivative += 1;
  return H;
}

MeasureResult psi_measure(const Problem& problem, const Eigen::VectorXd& x,
                          double eps, int q, double delta,
                          EvalCounters* counters) {
  Classification cls = classify(problem, x, eps);
  const Eigen::VectorXd g = working_gradient(problem, x, cls.active, counters);
  std::optional<Eigen::MatrixXd> H;
  if (q == 2) H = working_hessian(problem, x, cls.active, nullptr);
  return psi_from_derivatives(g, H, problem.feasible, cls.Q, x, q, delta);
}

MeasureResult psi_model_measure(const FullModel& model,
                                const Eigen::VectorXd& s,
                                const Eigen::MatrixXd& Q, int q, double delta) {
  const Eigen::VectorXd g = model.gradient(s);
  std::optional<Eigen::MatrixXd> H;
  if (q == 2) H = model.hessian(s);
  // The measure is anchored at the trial point x + s.
  const Eigen::VectorXd xs = model.base_point() + s;
  return psi_from_derivatives(g, H, model.problem().feasible, Q, xs, q, delta);
}

}  // namespace psarp

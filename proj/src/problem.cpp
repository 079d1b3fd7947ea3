#include "psarp/problem.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "psarp/errors.hpp"

namespace psarp {

Eigen::VectorXd SmoothOracle::deriv_vec(
    const Eigen::VectorXd& z, int j,
    std::span<const Eigen::VectorXd> dirs) const {
  if (static_cast<int>(dirs.size()) != j - 1)
    throw DomainError("deriv_vec expects j-1 directions");
  const Eigen::Index m = z.size();
  Eigen::VectorXd out(m);
  std::vector<Eigen::VectorXd> full(dirs.begin(), dirs.end());
  full.emplace_back(Eigen::VectorXd::Zero(m));
  for (Eigen::Index t = 0; t < m; ++t) {
    full.back().setZero();
    full.back()[t] = 1.0;
    out[t] = deriv(z, j, full);
  }
  return out;
}

Eigen::MatrixXd SmoothOracle::deriv_mat(
    const Eigen::VectorXd& z, int j,
    std::span<const Eigen::VectorXd> dirs) const {
  if (static_cast<int>(dirs.size()) != j - 2)
    throw DomainError("deriv_mat expects j-2 directions");
  const Eigen::Index m = z.size();
  Eigen::MatrixXd out(m, m);
  std::vector<Eigen::VectorXd> full(dirs.begin(), dirs.end());
  full.emplace_back(Eigen::VectorXd::Zero(m));
  full.emplace_back(Eigen::VectorXd::Zero(m));
  for (Eigen::Index t = 0; t < m; ++t) {
    full[full.size() - 2].setZero();
    full[full.size() - 2][t] = 1.0;
    for (Eigen::Index u = t; u < m; ++u) {
      full.back().setZero();
      full.back()[u] = 1.0;
      const double v = deriv(z, j, full);
      out(t, u) = v;
      out(u, t) = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// QuadraticOracle

QuadraticOracle::QuadraticOracle(Eigen::MatrixXd H, Eigen::VectorXd c)
    : H_(std::move(H)), c_(std::move(c)) {
  if (H_.rows() != c_.size())
    throw DomainError("quadratic oracle: H rows must match c length");
  HtH_ = H_.transpose() * H_;
}

double QuadraticOracle::value(const Eigen::VectorXd& z) const {
  return 0.5 * (H_ * z - c_).squaredNorm();
}

double QuadraticOracle::deriv(const Eigen::VectorXd& z, int j,
                              std::span<const Eigen::VectorXd> dirs) const {
  if (static_cast<int>(dirs.size()) != j || j < 1)
    throw DomainError("deriv expects j >= 1 directions");
  if (j == 1) return (H_ * z - c_).dot(H_ * dirs[0]);
  if (j == 2) return dirs[0].dot(HtH_ * dirs[1]);
  return 0.0;
}

Eigen::VectorXd QuadraticOracle::deriv_vec(
    const Eigen::VectorXd& z, int j,
    std::span<const Eigen::VectorXd> dirs) const {
  if (static_cast<int>(dirs.size()) != j - 1)
    throw DomainError("deriv_vec expects j-1 directions");
  if (j == 1) return H_.transpose() * (H_ * z - c_);
  if (j == 2) return HtH_ * dirs[0];
  return Eigen::VectorXd::Zero(z.size());
}

Eigen::MatrixXd QuadraticOracle::deriv_mat(
    const Eigen::VectorXd& z, int j,
    std::span<const Eigen::VectorXd> dirs) const {
  if (static_cast<int>(dirs.size()) != j - 2)
    throw DomainError("deriv_mat expects j-2 directions");
  if (j == 2) return HtH_;
  return Eigen::MatrixXd::Zero(z.size(), z.size());
}

// ---------------------------------------------------------------------------
// QuarticWellOracle

namespace {

// j-th derivative of t -> 1/4 (t^2 - w)^2.
double well_deriv(double t, double w, int j) {
  switch (j) {
    case 0: {
      const double q = t * t - w;
      return 0.25 * q * q;
    }
    case 1: return t * t * t - w * t;
    case 2: return 3.0 * t * t - w;
    case 3: return 6.0 * t;
    case 4: return 6.0;
    default: return 0.0;
  }
}

}  // namespace

QuarticWellOracle::QuarticWellOracle(Eigen::VectorXd w) : w_(std::move(w)) {
  if (w_.size() == 0) throw DomainError("quartic well oracle: empty w");
}

double QuarticWellOracle::value(const Eigen::VectorXd& z) const {
  if (z.size() != w_.size())
    throw DomainError("quartic well oracle: dimension mismatch");
  double s = 0.0;
  for (Eigen::Index t = 0; t < z.size(); ++t) s += well_deriv(z[t], w_[t], 0);
  return s;
}

double QuarticWellOracle::deriv(const Eigen::VectorXd& z, int j,
                                std::span<const Eigen::VectorXd> dirs) const {
  if (static_cast<int>(dirs.size()) != j || j < 1)
    throw DomainError("deriv expects j >= 1 directions");
  if (j > 4) return 0.0;
  double s = 0.0;
  for (Eigen::Index t = 0; t < z.size(); ++t) {
    double prod = well_deriv(z[t], w_[t], j);
    for (int k = 0; k < j && prod != 0.0; ++k) prod *= dirs[k][t];
    s += prod;
  }
  return s;
}

Eigen::VectorXd QuarticWellOracle::deriv_vec(
    const Eigen::VectorXd& z, int j,
    std::span<const Eigen::VectorXd> dirs) const {
  if (static_cast<int>(dirs.size()) != j - 1)
    throw DomainError("deriv_vec expects j-1 directions");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(z.size());
  if (j > 4) return out;
  for (Eigen::Index t = 0; t < z.size(); ++t) {
    double prod = well_deriv(z[t], w_[t], j);
    for (int k = 0; k < j - 1 && prod != 0.0; ++k) prod *= dirs[k][t];
    out[t] = prod;
  }
  return out;
}

Eigen::MatrixXd QuarticWellOracle::deriv_mat(
    const Eigen::VectorXd& z, int j,
    std::span<const Eigen::VectorXd> dirs) const {
  if (static_cast<int>(dirs.size()) != j - 2)
    throw DomainError("deriv_mat expects j-2 directions");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(z.size(), z.size());
  if (j > 4) return out;
  for (Eigen::Index t = 0; t < z.size(); ++t) {
    double prod = well_deriv(z[t], w_[t], j);
    for (int k = 0; k < j - 2 && prod != 0.0; ++k) prod *= dirs[k][t];
    out(t, t) = prod;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CallbackOracle

CallbackOracle::CallbackOracle(ValueFn value, DerivFn deriv, int max_degree)
    : value_(std::move(value)), deriv_(std::move(deriv)),
      max_degree_(max_degree) {
  if (!value_ || !deriv_)
    throw DomainError("callback oracle requires value and deriv callables");
}

double CallbackOracle::value(const Eigen::VectorXd& z) const {
  return value_(z);
}

double CallbackOracle::deriv(const Eigen::VectorXd& z, int j,
                             std::span<const Eigen::VectorXd> dirs) const {
  if (static_cast<int>(dirs.size()) != j || j < 1)
    throw DomainError("deriv expects j >= 1 directions");
  if (max_degree_ >= 0 && j > max_degree_) return 0.0;
  return deriv_(z, j, dirs);
}

// ---------------------------------------------------------------------------
// Elements and problem

double HardElement::value(const Eigen::VectorXd& x) const {
  return weight * std::pow(residual(x).norm(), a);
}

namespace {

void check_row_map(const Eigen::MatrixXd& U, int n, const std::string& what,
                   std::vector<std::string>& out) {
  if (U.rows() < 1 || U.cols() != n) {
    out.push_back(what + ": U must be m x n with m >= 1");
    return;
  }
  Eigen::MatrixXd gram = U * U.transpose();
  gram -= Eigen::MatrixXd::Identity(U.rows(), U.rows());
  if (gram.cwiseAbs().maxCoeff() > 1e-10)
    out.push_back(what + ": rows of U must be orthonormal");
}

}  // namespace

std::vector<std::string> Problem::validate() const {
  std::vector<std::string> out;
  if (n <= 0) {
    out.push_back("problem dimension must be positive");
    return out;
  }
  if (feasible.dim() != n)
    out.push_back("feasible set dimension does not match problem");
  if (smooth.empty())
    out.push_back("problem must contain at least one smooth element");
  for (size_t i = 0; i < smooth.size(); ++i) {
    const std::string tag = "smooth element " + std::to_string(i);
    check_row_map(smooth[i].U, n, tag, out);
    if (!smooth[i].oracle) out.push_back(tag + ": missing oracle");
  }
  for (size_t i = 0; i < hard.size(); ++i) {
    const auto& el = hard[i];
    const std::string tag = "hard element " + std::to_string(i);
    check_row_map(el.U, n, tag, out);
    if (el.b.size() != el.U.rows())
      out.push_back(tag + ": b length must match U rows");
    if (!(el.a > 0.0) || !(el.a < 1.0))
      out.push_back(tag + ": exponent must lie in (0,1)");
    if (!(el.weight > 0.0)) out.push_back(tag + ": weight must be positive");
  }
  // Pairwise orthogonality of the hard row spaces (no overlapping groups).
  for (size_t i = 0; i < hard.size(); ++i) {
    for (size_t j = i + 1; j < hard.size(); ++j) {
      if (hard[i].U.cols() != n || hard[j].U.cols() != n) continue;
      if ((hard[i].U * hard[j].U.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        out.push_back("hard elements " + std::to_string(i) + " and " +
                      std::to_string(j) + ": row spaces must be orthogonal");
    }
  }
  for (size_t i = 0; i < hard.size(); ++i) {
    const auto& el = hard[i];
    if (el.U.cols() != n || el.b.size() != el.U.rows() ||
        feasible.dim() != n)
      continue;
    if (!is_kernel_centered(feasible, el.U, el.b))
      out.push_back("hard element " + std::to_string(i) +
                    ": feasible set is not kernel-centered (or b outside U F)");
  }
  bool maps_ok = !smooth.empty();
  for (const auto& el : smooth)
    if (el.U.cols() != n || el.U.rows() < 1) maps_ok = false;
  if (maps_ok && !(sigma_equiv_constant(*this) > 1e-10))
    out.push_back("stacked smooth maps must span the full space");
  return out;
}

void Problem::validate_or_throw() const {
  const std::vector<std::string> v = validate();
  if (v.empty()) return;
  std::string msg = "invalid problem:";
  for (const auto& s : v) msg += "\n  - " + s;
  throw DomainError(msg);
}

double sigma_equiv_constant(const Problem& problem) {
  Eigen::Index rows = 0;
  for (const auto& el : problem.smooth) rows += el.U.rows();
  Eigen::MatrixXd stacked(rows, problem.n);
  Eigen::Index at = 0;
  for (const auto& el : problem.smooth) {
    stacked.middleRows(at, el.U.rows()) = el.U;
    at += el.U.rows();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const double smin = (svd.singularValues().size() > 0 &&
                       stacked.rows() >= stacked.cols())
                          ? svd.singularValues().minCoeff()
                          : 0.0;
  return smin / std::sqrt(static_cast<double>(problem.smooth.size()));
}

double evaluate_f(const Problem& problem, const Eigen::VectorXd& x,
                  EvalCounters* counters) {
  if (x.size() != problem.n)
    throw DomainError("evaluate_f: point has wrong dimension");
  double f = 0.0;
  for (const auto& el : problem.smooth) f += el.oracle->value(el.U * x);
  for (const auto& el : problem.hard) f += el.value(x);
  if (counters) counters->evals_f += 1;
  return f;
}

double evaluate_f_working(const Problem& problem, const Eigen::VectorXd& x,
                          const std::vector<int>& hard_subset,
                          EvalCounters* counters) {
  if (x.size() != problem.n)
    throw DomainError("evaluate_f_working: point has wrong dimension");
  double f = 0.0;
  for (const auto& el : problem.smooth) f += el.oracle->value(el.U * x);
  for (int i : hard_subset) {
    const auto& el = problem.hard[i];
    const Eigen::VectorXd r = el.residual(x);
    if (r.norm() < 1e-14)
      throw SingularityError("working hard element has zero residual");
    f += el.weight * std::pow(r.norm(), el.a);
  }
  if (counters) counters->evals_f += 1;
  return f;
}

}  // namespace psarp

#include "psarp/feasible.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "psarp/errors.hpp"

namespace psarp {

FeasibleSet::FeasibleSet(Kind kind, int n, Eigen::VectorXd lo,
                         Eigen::VectorXd hi)
    : kind_(kind), n_(n), lo_(std::move(lo)), hi_(std::move(hi)) {}

FeasibleSet FeasibleSet::whole_space(int n) {
  if (n <= 0) throw DomainError("feasible set dimension must be positive");
  return FeasibleSet(Kind::WholeSpace, n, Eigen::VectorXd(), Eigen::VectorXd());
}

FeasibleSet FeasibleSet::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  if (lo.size() == 0 || lo.size() != hi.size())
    throw DomainError("box bounds must be nonempty and of equal length");
  for (Eigen::Index t = 0; t < lo.size(); ++t) {
    if (!(lo[t] <= hi[t]))
      throw DomainError("box bounds must satisfy lo <= hi componentwise");
  }
  const int n = static_cast<int>(lo.size());
  return FeasibleSet(Kind::Box, n, std::move(lo), std::move(hi));
}

Eigen::VectorXd FeasibleSet::project(const Eigen::VectorXd& y) const {
  if (y.size() != n_) throw DomainError("projection input has wrong dimension");
  if (kind_ == Kind::WholeSpace) return y;
  return y.cwiseMax(lo_).cwiseMin(hi_);
}

bool FeasibleSet::contains(const Eigen::VectorXd& y, double tol) const {
  if (y.size() != n_) throw DomainError("containment input has wrong dimension");
  if (kind_ == Kind::WholeSpace) return true;
  return ((y - lo_).array() >= -tol).all() && ((hi_ - y).array() >= -tol).all();
}

namespace {

Eigen::VectorXd project_ball(const Eigen::VectorXd& d, double delta) {
  if (!std::isfinite(delta)) return d;
  const double nd = d.norm();
  if (nd <= delta) return d;
  return d * (delta / nd);
}

}  // namespace

Eigen::VectorXd project_intersection(const FeasibleSet& set,
                                     const Eigen::MatrixXd& Q,
                                     const Eigen::VectorXd& x, double delta,
                                     const Eigen::VectorXd& y, double tol,
                                     int max_sweeps) {
  const Eigen::Index n = x.size();
  if (y.size() != n || (Q.size() > 0 && Q.rows() != n))
    throw DomainError("project_intersection dimension mismatch");
  if (Q.cols() == 0) return x;  // range(Q) = {0}

  // Work in displacement coordinates d = z - x.
  Eigen::VectorXd d = y - x;
  Eigen::VectorXd pF = Eigen::VectorXd::Zero(n);  // Dykstra corrections
  Eigen::VectorXd pB = Eigen::VectorXd::Zero(n);
  // range(Q) is a subspace: no correction variable needed for it.

  const bool need_feasible = !set.is_whole();
  const bool need_ball = std::isfinite(delta);
  if (!need_feasible && !need_ball) {
    return x + Q * (Q.transpose() * (y - x));
  }

  Eigen::VectorXd prev = d;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Eigen::VectorXd z = d + pF;
    Eigen::VectorXd dF = need_feasible ? (set.project(x + z) - x) : z;
    pF = z - dF;

    z = dF + pB;
    Eigen::VectorXd dB = need_ball ? project_ball(z, delta) : z;
    pB = z - dB;

    d = Q * (Q.transpose() * dB);

    if ((d - prev).norm() <= tol * (1.0 + d.norm())) {
      // Verify membership in all three sets before declaring success.
      const bool in_F = set.contains(x + d, 10 * tol);
      const bool in_B = !need_ball || d.norm() <= delta * (1 + 10 * tol);
      if (in_F && in_B) return x + d;
    }
    prev = d;
  }
  throw NoConvergenceError("alternating projections did not converge", x + d,
                           (d - prev).norm());
}

bool is_kernel_centered(const FeasibleSet& set, const Eigen::MatrixXd& U,
                        const Eigen::VectorXd& b, int num_samples,
                        unsigned seed) {
  const Eigen::Index n = U.cols();
  if (b.size() != U.rows()) throw DomainError("is_kernel_centered: b size");
  if (set.dim() != n) throw DomainError("is_kernel_centered: dimension");
  if (set.is_whole()) return true;

  // Coordinate-selector rows (each row is +/- a standard basis vector):
  // the pseudo-inverse point and kernel projections act on disjoint
  // coordinates, so containment reduces to per-coordinate bound checks.
  bool selector = true;
  std::vector<int> sel_col(U.rows(), -1);
  std::vector<double> sel_sign(U.rows(), 1.0);
  for (Eigen::Index i = 0; i < U.rows() && selector; ++i) {
    int nz = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double u = U(i, t);
      if (u == 0.0) continue;
      if (nz >= 0 || (std::abs(u) != 1.0)) {
        selector = false;
        break;
      }
      nz = static_cast<int>(t);
      sel_sign[i] = u;
    }
    if (nz < 0) selector = false;
    sel_col[i] = nz;
  }
  if (selector) {
    // Need, for each selected coordinate t = sel_col[i]:  lo_t <= s*b_i <= hi_t.
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
      const int t = sel_col[i];
      const double v = sel_sign[i] * b[i];
      if (v < set.lower()[t] - 1e-12 || v > set.upper()[t] + 1e-12) return false;
    }
    return true;
  }

  // Monte-Carlo fallback: sample z in F and test U^+ b + P_ker(z - U^+ b)
  // (equivalently the kernel component of z shifted to the centre) in F.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(U);
  Eigen::VectorXd center = cod.solve(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(U, Eigen::ComputeFullV);
  const Eigen::Index rank = svd.rank();
  Eigen::MatrixXd K = svd.matrixV().rightCols(n - rank);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int s = 0; s < num_samples; ++s) {
    Eigen::VectorXd z(n);
    for (Eigen::Index t = 0; t < n; ++t) {
      const double lo = std::max(set.lower()[t], -1e6);
      const double hi = std::min(set.upper()[t], 1e6);
      z[t] = lo + unif(rng) * (hi - lo);
    }
    Eigen::VectorXd cand = center + K * (K.transpose() * z);
    if (!set.contains(cand, 1e-9)) return false;
  }
  return true;
}

}  // namespace psarp

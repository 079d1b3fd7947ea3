#include "psarp/model.hpp"

#include <cmath>

#include "psarp/errors.hpp"
#include "psarp/tensor.hpp"

namespace psarp {

double mu_value(double rho, double a, int p, double zeta) {
  if (!(rho > 0.0)) throw DomainError("mu_value requires rho > 0");
  if (!(a > 0.0) || !(a < 1.0)) throw DomainError("mu_value requires a in (0,1)");
  if (p < 1) throw DomainError("mu_value requires p >= 1");
  if (zeta < -rho * (1.0 + 1e-12))
    throw DomainError("mu_value requires zeta >= -rho");
  double sum = std::pow(rho, a);
  double fact = 1.0;
  for (int l = 1; l <= p; ++l) {
    fact *= l;
    sum += tensor::pi_factor(a, l) / fact * std::pow(zeta, l) *
           std::pow(rho, a - l);
  }
  return sum;
}

double mu_derivative(double rho, double a, int p, double zeta, int order) {
  if (order < 1) throw DomainError("mu_derivative requires order >= 1");
  if (!(rho > 0.0)) throw DomainError("mu_derivative requires rho > 0");
  if (order > p) return 0.0;
  double sum = 0.0;
  for (int l = order; l <= p; ++l) {
    double fact = 1.0;
    for (int k = 2; k <= l - order; ++k) fact *= k;
    sum += tensor::pi_factor(a, l) / fact * std::pow(zeta, l - order) *
           std::pow(rho, a - l);
  }
  return sum;
}

// ---------------------------------------------------------------------------

FullModel::FullModel(const Problem& problem, Eigen::VectorXd x, int p,
                     std::vector<double> sigma, std::vector<char> hard_active)
    : problem_(problem), x_(std::move(x)), p_(p), sigma_(std::move(sigma)),
      hard_active_(std::move(hard_active)) {
  if (x_.size() != problem_.n) throw DomainError("model base point dimension");
  if (p_ < 1) throw DomainError("model degree must be >= 1");
  if (sigma_.size() != problem_.smooth.size())
    throw DomainError("one regularization weight per smooth element required");
  if (hard_active_.size() != problem_.hard.size())
    throw DomainError("one activity flag per hard element required");
  for (double s : sigma_)
    if (!(s > 0.0)) throw DomainError("regularization weights must be positive");
  smooth_base_.reserve(problem_.smooth.size());
  for (const auto& el : problem_.smooth) smooth_base_.push_back(el.U * x_);
  hard_res_.reserve(problem_.hard.size());
  for (const auto& el : problem_.hard) hard_res_.push_back(el.residual(x_));
  for (size_t i = 0; i < hard_res_.size(); ++i) {
    if (hard_active_[i] && hard_res_[i].norm() <= tensor::kSingularityFloor)
      throw SingularityError("active hard element has (near-)zero residual");
  }
}

void FullModel::set_sigma(int i, double sigma) {
  if (i < 0 || i >= static_cast<int>(sigma_.size()))
    throw DomainError("set_sigma: index");
  if (!(sigma > 0.0)) throw DomainError("set_sigma: weight must be positive");
  sigma_[i] = sigma;
}

void FullModel::set_hard_active(int i, bool active) {
  if (i < 0 || i >= static_cast<int>(hard_active_.size()))
    throw DomainError("set_hard_active: index");
  hard_active_[i] = active ? 1 : 0;
}

double FullModel::smooth_taylor(int i, const Eigen::VectorXd& s) const {
  const auto& el = problem_.smooth[i];
  const Eigen::VectorXd si = el.U * s;
  double val = el.oracle->value(smooth_base_[i]);
  std::vector<Eigen::VectorXd> dirs;
  double fact = 1.0;
  const int top = el.oracle->max_degree() >= 0
                      ? std::min(p_, el.oracle->max_degree())
                      : p_;
  for (int l = 1; l <= top; ++l) {
    fact *= l;
    dirs.push_back(si);
    val += el.oracle->deriv(smooth_base_[i], l, dirs) / fact;
  }
  return val;
}

double FullModel::smooth_model(int i, const Eigen::VectorXd& s) const {
  const Eigen::VectorXd si = problem_.smooth[i].U * s;
  double fact = 1.0;
  for (int l = 2; l <= p_ + 1; ++l) fact *= l;
  return smooth_taylor(i, s) + sigma_[i] / fact * std::pow(si.norm(), p_ + 1);
}

double FullModel::hard_model(int i, const Eigen::VectorXd& s) const {
  if (!hard_active_[i]) return 0.0;
  const auto& el = problem_.hard[i];
  const double rho = hard_res_[i].norm();
  const double zeta = (hard_res_[i] + el.U * s).norm() - rho;
  return el.weight * mu_value(rho, el.a, p_, zeta);
}

double FullModel::taylor_value(const Eigen::VectorXd& s) const {
  double val = 0.0;
  for (size_t i = 0; i < problem_.smooth.size(); ++i)
    val += smooth_taylor(static_cast<int>(i), s);
  for (size_t i = 0; i < problem_.hard.size(); ++i)
    val += hard_model(static_cast<int>(i), s);
  return val;
}

double FullModel::value(const Eigen::VectorXd& s) const {
  double val = 0.0;
  for (size_t i = 0; i < problem_.smooth.size(); ++i)
    val += smooth_model(static_cast<int>(i), s);
  for (size_t i = 0; i < problem_.hard.size(); ++i)
    val += hard_model(static_cast<int>(i), s);
  return val;
}

Eigen::VectorXd FullModel::gradient(const Eigen::VectorXd& s) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x_.size());
  for (size_t i = 0; i < problem_.smooth.size(); ++i) {
    const auto& el = problem_.smooth[i];
    const Eigen::VectorXd si = el.U * s;
    Eigen::VectorXd gi = Eigen::VectorXd::Zero(si.size());
    std::vector<Eigen::VectorXd> dirs;
    double fact = 1.0;  // (l-1)!
    const int top = el.oracle->max_degree() >= 0
                        ? std::min(p_, el.oracle->max_degree())
                        : p_;
    for (int l = 1; l <= top; ++l) {
      if (l >= 2) {
        fact *= (l - 1);
        dirs.push_back(si);
      }
      gi += el.oracle->deriv_vec(smooth_base_[i], l, dirs) / fact;
    }
    double pfact = 1.0;
    for (int l = 2; l <= p_; ++l) pfact *= l;
    const double ns = si.norm();
    if (ns > 0.0) gi += sigma_[i] / pfact * std::pow(ns, p_ - 1) * si;
    g += el.U.transpose() * gi;
  }
  for (size_t i = 0; i < problem_.hard.size(); ++i) {
    if (!hard_active_[i]) continue;
    const auto& el = problem_.hard[i];
    const double rho = hard_res_[i].norm();
    const Eigen::VectorXd rs = hard_res_[i] + el.U * s;
    const double nrs = rs.norm();
    // At the (sub)differential singularity the isotropic model attains its
    // floor in norm; a zero direction is a valid descent-neutral choice.
    if (nrs <= tensor::kSingularityFloor) continue;
    const double zeta = nrs - rho;
    const double mp = mu_derivative(rho, el.a, p_, zeta, 1);
    g += el.weight * mp / nrs * (el.U.transpose() * rs);
  }
  return g;
}

Eigen::MatrixXd FullModel::hessian(const Eigen::VectorXd& s) const {
  const Eigen::Index n = x_.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (size_t i = 0; i < problem_.smooth.size(); ++i) {
    const auto& el = problem_.smooth[i];
    const Eigen::VectorXd si = el.U * s;
    Eigen::MatrixXd Hi = Eigen::MatrixXd::Zero(si.size(), si.size());
    std::vector<Eigen::VectorXd> dirs;
    double fact = 1.0;  // (l-2)!
    const int top = el.oracle->max_degree() >= 0
                        ? std::min(p_, el.oracle->max_degree())
                        : p_;
    for (int l = 2; l <= top; ++l) {
      if (l >= 3) {
        fact *= (l - 2);
        dirs.push_back(si);
      }
      Hi += el.oracle->deriv_mat(smooth_base_[i], l, dirs) / fact;
    }
    double pfact = 1.0;
    for (int l = 2; l <= p_; ++l) pfact *= l;
    const double ns = si.norm();
    if (p_ == 1) {
      Hi += sigma_[i] * Eigen::MatrixXd::Identity(si.size(), si.size());
    } else if (ns > 0.0) {
      Hi += sigma_[i] / pfact *
            (std::pow(ns, p_ - 1) *
                 Eigen::MatrixXd::Identity(si.size(), si.size()) +
             (p_ - 1) * std::pow(ns, p_ - 3) * si * si.transpose());
    }
    H += el.U.transpose() * Hi * el.U;
  }
  for (size_t i = 0; i < problem_.hard.size(); ++i) {
    if (!hard_active_[i]) continue;
    const auto& el = problem_.hard[i];
    const double rho = hard_res_[i].norm();
    const Eigen::VectorXd rs = hard_res_[i] + el.U * s;
    const double nrs = rs.norm();
    if (nrs <= tensor::kSingularityFloor) continue;
    const double zeta = nrs - rho;
    const double mp = mu_derivative(rho, el.a, p_, zeta, 1);
    const double mpp = mu_derivative(rho, el.a, p_, zeta, 2);
    const Eigen::VectorXd u = rs / nrs;
    Eigen::MatrixXd Hi =
        mpp * u * u.transpose() +
        mp / nrs *
            (Eigen::MatrixXd::Identity(u.size(), u.size()) - u * u.transpose());
    H += el.weight * (el.U.transpose() * Hi * el.U);
  }
  return H;
}

}  // namespace psarp

#pragma once

// Regularized step model built from per-element Taylor expansions (smooth
// elements, with adaptive (p+1)-st power regularization) and the isotropic
// upper model of ||r + s||^a driven only by the change of residual norm
// zeta = ||r + s|| - ||r|| (hard elements).

#include <vector>

#include <Eigen/Core>

#include "psarp/problem.hpp"

namespace psarp {

// mu(rho, zeta) = rho^a + sum_{l=1}^p pi(a-l)/l! zeta^l rho^{a-l},
// the degree-p Taylor polynomial of (rho + zeta)^a in zeta.  Requires
// rho > 0, zeta >= -rho.  Overestimates (rho + zeta)^a when p is odd.
double mu_value(double rho, double a, int p, double zeta);

// d^order/dzeta^order of mu(rho, .) at zeta, order >= 1.
double mu_derivative(double rho, double a, int p, double zeta, int order);

// Model of the objective change around a base point x:
//   m(s) = sum_{i smooth} [ T_{f_i,p}(U_i x; U_i s) + sigma_i/(p+1)! ||U_i s||^{p+1} ]
//        + sum_{i hard, active} w_i mu(||r_i||, zeta_i(s)),
//          zeta_i(s) = ||r_i + U_i s|| - ||r_i||.
// Hard elements that are not active have had their residuals fixed at zero
// and contribute nothing.
class FullModel {
 public:
  FullModel(const Problem& problem, Eigen::VectorXd x, int p,
            std::vector<double> sigma, std::vector<char> hard_active);

  const Problem& problem() const { return problem_; }
  int dim() const { return static_cast<int>(x_.size()); }
  int degree() const { return p_; }
  const Eigen::VectorXd& base_point() const { return x_; }
  const std::vector<double>& sigma() const { return sigma_; }
  const std::vector<char>& hard_active() const { return hard_active_; }

  // Full regularized model.
  double value(const Eigen::VectorXd& s) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& s) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& s) const;

  // Model without the regularization terms (Taylor + isotropic parts only);
  // the denominator of the acceptance ratio uses this.
  double taylor_value(const Eigen::VectorXd& s) const;

  // Per-element pieces, needed for the regularization weight updates.
  double smooth_model(int i, const Eigen::VectorXd& s) const;   // regularized
  double smooth_taylor(int i, const Eigen::VectorXd& s) const;  // unregularized
  double hard_model(int i, const Eigen::VectorXd& s) const;

  void set_sigma(int i, double sigma);
  void set_hard_active(int i, bool active);

  // Residual of hard element i at the base point.
  const Eigen::VectorXd& hard_residual(int i) const { return hard_res_[i]; }

 private:
  const Problem& problem_;
  Eigen::VectorXd x_;
  int p_;
  std::vector<double> sigma_;
  std::vector<char> hard_active_;
  std::vector<Eigen::VectorXd> smooth_base_;  // U_i x per smooth element
  std::vector<Eigen::VectorXd> hard_res_;     // r_i = U_i x - b_i per hard element
};

}  // namespace psarp

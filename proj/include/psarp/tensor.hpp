#pragma once

// Closed-form derivative tensors of r -> ||r||^a for a in (0,1), evaluated as
// multilinear forms on given directions.  No dense order-j tensor is ever
// materialized: everything reduces to inner products r.v and v.w.

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace psarp::tensor {

inline constexpr double kSingularityFloor = 1e-14;

// pi(a-j) = a * prod_{i=1}^{j-1} (a-i).  Sign is (-1)^(j-1) for a in (0,1).
double pi_factor(double a, int j);

// Integer coefficients mu_{j,i} of the derivative recursion
//   mu_{1,1} = 1,  mu_{j,0} = 0,
//   mu_{j,i} = mu_{j-1,i-1} + (2i-j+1) mu_{j-1,i}.
// Row j holds mu_{j,1..j}; mu_{j,i} = 0 whenever 2i < j.
const std::vector<double>& mu_row(int j);

// phi_{i,j} = mu_{j,i} * nu_i with nu_i = prod_{l=1}^{i} (a+2-2l).
// Returned vector has phi_{1..j} at indices 0..j-1.  sum_i phi_{i,j} = pi(a-j).
std::vector<double> phi_coefficients(double a, int j);

// grad^j ||r||^a applied to j copies of v (diagonal evaluation).
double normpow_diagonal(const Eigen::VectorXd& r, double a, int j,
                        const Eigen::VectorXd& v);

// grad^j ||r||^a applied to j (possibly distinct) directions.  Recovered from
// diagonal evaluations by the polarization identity for symmetric tensors.
double normpow_derivative(const Eigen::VectorXd& r, double a, int j,
                          std::span<const Eigen::VectorXd> dirs);

// The induced tensor norm || grad^j ||r||^a ||_[j] = |pi(a-j)| ||r||^(a-j),
// attained at v = r/||r||.
double normpow_tensor_norm(const Eigen::VectorXd& r, double a, int j);

// Gradient of ||Ux-b||^a pieces, as used by Taylor assembly:
// grad ||r||^a = a ||r||^(a-2) r.
Eigen::VectorXd normpow_gradient(const Eigen::VectorXd& r, double a);

// Hessian of ||r||^a: a||r||^(a-2) I + a(a-2)||r||^(a-4) r r^T.
Eigen::MatrixXd normpow_hessian(const Eigen::VectorXd& r, double a);

// Nested central-difference estimate of the |dirs|-th multilinear derivative
// of f at x, Richardson-extrapolated over {step, step/10} (order <= 2) or a
// three-level {step, step/2, step/4} ladder (order >= 3, where the two-level
// scheme loses too many digits to round-off).  Test oracle only.
double finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x,
                         std::span<const Eigen::VectorXd> dirs,
                         double step = 1e-3);

}  // namespace psarp::tensor

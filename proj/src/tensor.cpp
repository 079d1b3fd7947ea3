#include "psarp/tensor.hpp"

#include <cmath>
#include <mutex>

#include "psarp/errors.hpp"

namespace psarp::tensor {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

double factorial(int j) {
  double r = 1.0;
  for (int i = 2; i <= j; ++i) r *= i;
  return r;
}

void check_exponent(double a) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("exponent a must lie in (0,1)");
}

}  // namespace

double pi_factor(double a, int j) {
  check_exponent(a);
  if (j < 1) throw DomainError("pi_factor: order j must be >= 1");
  double v = a;
  for (int i = 1; i < j; ++i) v *= (a - i);
  return v;
}

const std::vector<double>& mu_row(int j) {
  if (j < 1) throw DomainError("mu_row: order j must be >= 1");
  static std::vector<std::vector<double>> table;  // table[j-1] = row j
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  if (table.empty()) table.push_back({1.0});  // mu_{1,1}
  while (static_cast<int>(table.size()) < j) {
    const int jj = static_cast<int>(table.size()) + 1;
    const std::vector<double>& prev = table.back();
    std::vector<double> row(jj, 0.0);
    auto mu_prev = [&](int i) {
      return (i >= 1 && i <= jj - 1) ? prev[i - 1] : 0.0;
    };
    for (int i = 1; i <= jj; ++i)
      row[i - 1] = mu_prev(i - 1) + (2 * i - jj + 1) * mu_prev(i);
    table.push_back(std::move(row));
  }
  return table[j - 1];
}

std::vector<double> phi_coefficients(double a, int j) {
  check_exponent(a);
  const std::vector<double>& mu = mu_row(j);
  std::vector<double> phi(j);
  double nu = 1.0;
  for (int i = 1; i <= j; ++i) {
    nu *= (a + 2.0 - 2.0 * i);
    phi[i - 1] = mu[i - 1] * nu;
  }
  return phi;
}

double normpow_diagonal(const Eigen::VectorXd& r, double a, int j,
                        const Eigen::VectorXd& v) {
  const double rn = r.norm();
  if (rn < kSingularityFloor)
    throw SingularityError("normpow derivative evaluated at r = 0");
  const std::vector<double> phi = phi_coefficients(a, j);
  const double rv = r.dot(v);
  const double vv = v.squaredNorm();
  double total = 0.0;
  for (int i = 1; i <= j; ++i) {
    if (phi[i - 1] == 0.0) continue;  // mu_{j,i} = 0 for 2i < j
    total += phi[i - 1] * std::pow(rn, a - 2 * i) * ipow(rv, 2 * i - j) *
             ipow(vv, j - i);
  }
  return total;
}

double normpow_derivative(const Eigen::VectorXd& r, double a, int j,
                          std::span<const Eigen::VectorXd> dirs) {
  if (static_cast<int>(dirs.size()) != j)
    throw DomainError("normpow_derivative: need exactly j directions");
  if (j == 1) return normpow_diagonal(r, a, 1, dirs[0]);
  // Polarization: T[v_1..v_j] = (1/(2^j j!)) sum_eps (prod eps) T[sum eps_i v_i]^j.
  const int n = static_cast<int>(r.size());
  double acc = 0.0;
  Eigen::VectorXd u(n);
  for (unsigned mask = 0; mask < (1u << j); ++mask) {
    u.setZero();
    int sign = 1;
    for (int i = 0; i < j; ++i) {
      if (mask & (1u << i)) {
        u += dirs[i];
      } else {
        u -= dirs[i];
        sign = -sign;
      }
    }
    acc += sign * normpow_diagonal(r, a, j, u);
  }
  return acc / (factorial(j) * ipow(2.0, j));
}

double normpow_tensor_norm(const Eigen::VectorXd& r, double a, int j) {
  const double rn = r.norm();
  if (rn < kSingularityFloor)
    throw SingularityError("normpow tensor norm evaluated at r = 0");
  return std::abs(pi_factor(a, j)) * std::pow(rn, a - j);
}

Eigen::VectorXd normpow_gradient(const Eigen::VectorXd& r, double a) {
  const double rn = r.norm();
  if (rn < kSingularityFloor)
    throw SingularityError("normpow gradient evaluated at r = 0");
  return a * std::pow(rn, a - 2.0) * r;
}

Eigen::MatrixXd normpow_hessian(const Eigen::VectorXd& r, double a) {
  const double rn = r.norm();
  if (rn < kSingularityFloor)
    throw SingularityError("normpow hessian evaluated at r = 0");
  const int n = static_cast<int>(r.size());
  Eigen::MatrixXd h = a * std::pow(rn, a - 2.0) *
                      Eigen::MatrixXd::Identity(n, n);
  h += a * (a - 2.0) * std::pow(rn, a - 4.0) * r * r.transpose();
  return h;
}

namespace {

double nested_central(const std::function<double(const Eigen::VectorXd&)>& f,
                      const Eigen::VectorXd& x,
                      std::span<const Eigen::VectorXd> dirs, double h) {
  if (dirs.empty()) return f(x);
  const Eigen::VectorXd& v = dirs.back();
  std::span<const Eigen::VectorXd> rest = dirs.first(dirs.size() - 1);
  return (nested_central(f, x + h * v, rest, h) -
          nested_central(f, x - h * v, rest, h)) /
         (2.0 * h);
}

}  // namespace

double finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x,
                         std::span<const Eigen::VectorXd> dirs, double step) {
  const int j = static_cast<int>(dirs.size());
  if (j <= 2) {
    // Two-point Richardson over {h, h/10}; central-difference error is O(h^2).
    const double f1 = nested_central(f, x, dirs, step);
    const double f2 = nested_central(f, x, dirs, step / 10.0);
    return (100.0 * f2 - f1) / 99.0;
  }
  // Higher orders: round-off grows like eps/h^j, so keep steps larger and
  // cancel both the h^2 and h^4 truncation terms.
  const double f1 = nested_central(f, x, dirs, step);
  const double f2 = nested_central(f, x, dirs, step / 2.0);
  const double f4 = nested_central(f, x, dirs, step / 4.0);
  const double r12 = (4.0 * f2 - f1) / 3.0;
  const double r24 = (4.0 * f4 - f2) / 3.0;
  return (16.0 * r24 - r12) / 15.0;
}

}  // namespace psarp::tensor

#include "psarp/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <Eigen/Dense>

#include "psarp/errors.hpp"

namespace psarp {

namespace {

Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd A(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) A(r, c) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  return Q;
}

// Dense matrix with singular values in [1, cond], scaled to unit largest.
Eigen::MatrixXd well_conditioned(int rows, int cols, double cond,
                                 std::mt19937_64& rng) {
  const int k = std::min(rows, cols);
  std::uniform_real_distribution<double> unif(1.0, cond);
  Eigen::VectorXd sv(k);
  for (int t = 0; t < k; ++t) sv[t] = unif(rng);
  sv[0] = cond;
  sv[k - 1] = 1.0;
  Eigen::MatrixXd Ul = random_orthogonal(rows, rng).leftCols(k);
  Eigen::MatrixXd Vr = random_orthogonal(cols, rng).leftCols(k);
  return Ul * sv.asDiagonal() * Vr.transpose() / cond;
}

}  // namespace

GeneratedProblem gen_group_lasso(int groups, int group_size, int n,
                                 double lambda, double a, unsigned seed) {
  if (groups < 1 || group_size < 1 || groups * group_size > n)
    throw DomainError("groups must be disjoint and cover at most n coordinates");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Problem problem;
  problem.n = n;

  SmoothElement se;
  se.U = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd H = well_conditioned(n, n, 10.0, rng);
  Eigen::VectorXd target(n);
  for (int t = 0; t < n; ++t) target[t] = gauss(rng);
  se.oracle = std::make_shared<QuadraticOracle>(H, H * target);
  se.oracle_name = "quadratic";
  se.lipschitz_p = 0.0;  // third derivative vanishes identically
  problem.smooth.push_back(std::move(se));

  if (lambda < 0.0) throw DomainError("group weight lambda must be >= 0");
  // lambda == 0 collapses to the plain least-squares problem: no hard terms.
  for (int g = 0; lambda > 0.0 && g < groups; ++g) {
    HardElement he;
    he.U = Eigen::MatrixXd::Zero(group_size, n);
    for (int t = 0; t < group_size; ++t) he.U(t, g * group_size + t) = 1.0;
    he.b = Eigen::VectorXd::Zero(group_size);
    he.a = a;
    he.weight = lambda;
    problem.hard.push_back(std::move(he));
  }

  Eigen::VectorXd lo(n), hi(n);
  for (int t = 0; t < n; ++t) {
    lo[t] = -(1.0 + unif(rng));  // in [-2,-1]
    hi[t] = 1.0 + unif(rng);     // in [1,2]
  }
  problem.feasible = FeasibleSet::box(lo, hi);

  // Start well inside the box with every group away from its singularity.
  Eigen::VectorXd x0(n);
  for (int t = 0; t < n; ++t) x0[t] = 0.5 * hi[t];
  return {std::move(problem), std::move(x0)};
}

GeneratedProblem gen_row_sparse_regression(int nu, int gamma, int kappa_rows,
                                           double lambda, double a,
                                           unsigned seed) {
  if (nu < 1 || gamma < 1 || kappa_rows < 1)
    throw DomainError("dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int n = nu * gamma;

  Problem problem;
  problem.n = n;
  problem.feasible = FeasibleSet::whole_space(n);

  Eigen::MatrixXd H = well_conditioned(kappa_rows, nu, 10.0, rng);
  Eigen::MatrixXd Xbar = Eigen::MatrixXd::Zero(nu, gamma);
  for (int c = 0; c < gamma; ++c) Xbar(0, c) = 1.0 + gauss(rng) * 0.1;
  Eigen::MatrixXd B = H * Xbar;

  for (int c = 0; c < gamma; ++c) {
    SmoothElement se;
    se.U = Eigen::MatrixXd::Zero(nu, n);
    for (int r = 0; r < nu; ++r) se.U(r, r * gamma + c) = 1.0;
    se.oracle = std::make_shared<QuadraticOracle>(H, B.col(c));
    se.oracle_name = "quadratic";
    se.lipschitz_p = 0.0;
    problem.smooth.push_back(std::move(se));
  }
  for (int r = 0; r < nu; ++r) {
    HardElement he;
    he.U = Eigen::MatrixXd::Zero(gamma, n);
    for (int c = 0; c < gamma; ++c) he.U(c, r * gamma + c) = 1.0;
    he.b = Eigen::VectorXd::Zero(gamma);
    he.a = a;
    he.weight = lambda;
    problem.hard.push_back(std::move(he));
  }

  Eigen::VectorXd x0(n);
  for (int t = 0; t < n; ++t) x0[t] = 1.0 + 0.1 * gauss(rng);
  return {std::move(problem), std::move(x0)};
}

SweepReport run_sweep(const Experiment& experiment) {
  if (experiment.eps_values.size() < 1)
    throw DomainError("sweep needs at least one accuracy value");
  for (size_t i = 0; i < experiment.eps_values.size(); ++i) {
    const double e = experiment.eps_values[i];
    if (!(e > 0.0) || !(e <= 1.0))
      throw DomainError("sweep accuracies must lie in (0,1]");
    if (i > 0 && !(e < experiment.eps_values[i - 1]))
      throw DomainError("sweep accuracies must be strictly decreasing");
  }

  SweepReport out;
  const SolverConfig& base = experiment.config;
  out.theoretical_exponent =
      static_cast<double>(base.p + 1) / (base.p - base.q + 1);

  for (double e : experiment.eps_values) {
    SweepPoint pt;
    pt.eps = e;
    SolverConfig cfg = base;
    cfg.eps = e;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      pt.report = solve(experiment.generated.problem, experiment.generated.x0,
                        cfg);
      pt.successful = pt.report.ledger.successful();
      pt.unsuccessful = pt.report.ledger.unsuccessful();
      pt.evals_f = pt.report.counters.evals_f;
      pt.evals_derivative = pt.report.counters.evals_derivative;
      pt.psi_final = pt.report.psi_final;
      pt.converged = pt.report.status == SolveStatus::Converged;
    } catch (const std::exception& ex) {
      pt.error = ex.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    pt.runtime_seconds =
        std::chrono::duration<double>(t1 - t0).count();
    out.points.push_back(std::move(pt));
  }

  // OLS fit of log|S| against log(1/eps) over converged points.
  std::vector<std::pair<double, double>> xy;
  for (const auto& pt : out.points) {
    if (pt.converged && pt.successful > 0)
      xy.emplace_back(std::log(1.0 / pt.eps),
                      std::log(static_cast<double>(pt.successful)));
  }
  if (xy.size() >= 3) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [xv, yv] : xy) {
      sx += xv;
      sy += yv;
      sxx += xv * xv;
      sxy += xv * yv;
    }
    const double m = xy.size();
    const double denom = m * sxx - sx * sx;
    if (denom > 0.0) out.slope = (m * sxy - sx * sy) / denom;
  }

  if (!experiment.csv_path.empty()) {
    std::ofstream f(experiment.csv_path, std::ios::binary);
    if (!f) throw DomainError("cannot write CSV: " + experiment.csv_path);
    f << sweep_to_csv(out);
  }
  return out;
}

std::string sweep_to_csv(const SweepReport& report) {
  std::string out = "eps,succ,unsucc,evals_f,evals_der,psi_final\n";
  char line[256];
  for (const auto& pt : report.points) {
    std::snprintf(line, sizeof(line), "%.6e,%d,%d,%ld,%ld,%.12e\n", pt.eps,
                  pt.successful, pt.unsuccessful, pt.evals_f,
                  pt.evals_derivative, pt.psi_final);
    out += line;
  }
  return out;
}

nlohmann::json sweep_to_json(const SweepReport& report) {
  nlohmann::json j;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& pt : report.points) {
    nlohmann::json jp;
    jp["eps"] = pt.eps;
    jp["successful"] = pt.successful;
    jp["unsuccessful"] = pt.unsuccessful;
    jp["evals_f"] = pt.evals_f;
    jp["evals_derivative"] = pt.evals_derivative;
    jp["psi_final"] = pt.psi_final;
    jp["runtime_seconds"] = pt.runtime_seconds;
    jp["converged"] = pt.converged;
    if (!pt.error.empty()) jp["error"] = pt.error;
    jp["kappa_S"] = pt.report.ledger.kappa_S;
    pts.push_back(jp);
  }
  j["points"] = pts;
  if (report.slope.has_value()) j["slope"] = *report.slope;
  j["theoretical_exponent"] = report.theoretical_exponent;
  return j;
}

}  // namespace psarp

#include "psarp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <random>

#include "psarp/errors.hpp"
#include "psarp/tensor.hpp"

namespace psarp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

int log_level() {
  const char* v = std::getenv("PSARP_LOG");
  if (!v) return 0;
  if (std::strcmp(v, "iter") == 0) return 1;
  if (std::strcmp(v, "debug") == 0) return 2;
  return 0;
}

// Sampled upper estimate of the norms of the smooth derivative tensors at x,
// used only for the ledger diagnostics (omega, kappa constants).
double sample_kappa_N(const Problem& problem, const Eigen::VectorXd& x, int p,
                      unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double kn = 0.0;
  for (const auto& el : problem.smooth) {
    const Eigen::VectorXd z = el.U * x;
    const int top = el.oracle->max_degree() >= 0
                        ? std::min(p + 1, el.oracle->max_degree())
                        : p + 1;
    for (int j = 1; j <= top; ++j) {
      for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd v(z.size());
        for (Eigen::Index t = 0; t < v.size(); ++t) v[t] = gauss(rng);
        if (v.norm() == 0.0) continue;
        v /= v.norm();
        std::vector<Eigen::VectorXd> dirs(j, v);
        kn = std::max(kn, std::abs(el.oracle->deriv(z, j, dirs)));
      }
    }
  }
  return kn;
}

}  // namespace

void SolverConfig::validate(const Problem& problem) const {
  if (q != 1 && q != 2)
    throw DomainError("criticality order q must be 1 or 2 (higher orders are "
                      "not supported)");
  const bool has_hard = !problem.hard.empty();
  if (has_hard) {
    if (p != 1 && p != 3)
      throw DomainError("with non-Lipschitz elements the model degree p must "
                        "be odd (1 or 3)");
  } else if (p < 1 || p > 3) {
    throw DomainError("model degree p must lie in {1,2,3}");
  }
  if (q > p) throw DomainError("q must not exceed p");
  if (!(eps > 0.0) || !(eps <= 1.0)) throw DomainError("eps must be in (0,1]");
  if (!(delta > 0.0) || !(delta <= 1.0))
    throw DomainError("delta must be in (0,1]");
  if (!(gamma0 > 0.0) || !(gamma0 < 1.0))
    throw DomainError("gamma0 must be in (0,1)");
  if (!(gamma1 > 1.0) || !(gamma1 <= gamma2))
    throw DomainError("need 1 < gamma1 <= gamma2");
  if (!(eta > 0.0) || !(eta < 1.0)) throw DomainError("eta must be in (0,1)");
  if (!(theta > 0.0) || !(theta <= 1.0))
    throw DomainError("theta must be in (0,1]");
  if (!(varpi > 0.0) || !(varpi <= 1.0))
    throw DomainError("varpi must be in (0,1]");
  if (!(sigma_min > 0.0) || !(sigma0 >= sigma_min))
    throw DomainError("need sigma0 >= sigma_min > 0");
  if (!(kappa_big > 1.0)) throw DomainError("kappa_big must exceed 1");
  if (max_iterations < 1 || max_inner_iterations < 1)
    throw DomainError("iteration caps must be positive");
}

double compute_omega(double a, int n_smooth, double kappa_N, double sigma_max,
                     int p, int q) {
  if (!(a > 0.0) || !(a < 1.0)) throw DomainError("compute_omega: a in (0,1)");
  if (n_smooth < 1) throw DomainError("compute_omega: need a smooth element");
  const double denom =
      12.0 * n_smooth * (kappa_N + sigma_max / factorial(p - q + 1));
  const double second = std::pow(a / denom, 1.0 / (1.0 - a));
  return std::min(a / 16.0, second);
}

bool accept_step(double delta_f, double delta_T, double eta) {
  if (!(delta_T > 0.0))
    throw DomainError("acceptance ratio undefined: model decrease must be "
                      "positive (subsolver invariant violated)");
  return delta_f / delta_T >= eta;
}

int Ledger::count(const std::string& category) const {
  int c = 0;
  for (const auto& r : records)
    if (r.category == category) ++c;
  return c;
}

int Ledger::successful() const {
  int c = 0;
  for (const auto& r : records)
    if (r.success) ++c;
  return c;
}

int Ledger::unsuccessful() const {
  return static_cast<int>(records.size()) - successful();
}

bool Ledger::check(const Problem& problem, std::vector<std::string>* why) const {
  std::vector<std::string> local;
  auto fail = [&](const std::string& msg) { local.push_back(msg); };
  const double tol = 1e-9;

  int succ_so_far = 0;
  for (size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    // Category replay: freezing successes, then long steps, then the rest.
    std::string expect = "U";
    if (r.success) {
      if (!r.frozen.empty())
        expect = "S_eps";
      else if (r.norm_s >= 0.25 * omega)
        expect = "S_s";
      else
        expect = "S_heart";
    }
    if (r.category != expect)
      fail("iteration " + std::to_string(r.k) + ": category " + r.category +
           " but data implies " + expect);

    if (r.success) {
      ++succ_so_far;
      // Deactivation steps may be accepted on the decrease of the full
      // objective, with the drop of the frozen terms added back in.
      double frozen_value_drop = 0.0;
      for (int i : r.frozen)
        frozen_value_drop += problem.hard[i].weight *
                             std::pow(r.res_before[i], problem.hard[i].a);
      const bool ratio_ok = r.delta_f >= eta * r.delta_T - tol;
      const bool full_ok =
          !r.frozen.empty() && r.delta_f + frozen_value_drop >= -tol;
      if (!ratio_ok && !full_ok)
        fail("iteration " + std::to_string(r.k) +
             ": accepted with insufficient decrease");
    }
    // The guaranteed model-decrease floor holds whenever the working set is
    // unchanged by the step; deactivation steps are exempt because the drop
    // of the frozen terms is excluded from the recorded decrease.
    const double guaranteed =
        sigma_min * std::pow(varsigma, p + 1) / factorial(p + 1) *
        std::pow(r.norm_s, p + 1);
    if (r.frozen.empty() && r.delta_T < guaranteed - tol)
      fail("iteration " + std::to_string(r.k) +
           ": model decrease below the guaranteed bound");

    // Counting law: iterations so far vs. successes so far.
    if (static_cast<double>(k + 1) >
        kappa_a * succ_so_far + std::max(kappa_b, 0.0) + tol)
      fail("iteration " + std::to_string(r.k) +
           ": unsuccessful-iteration bound violated");

    // Regularization cap when every element has a known Lipschitz constant:
    // the recorded maximum weight must respect the largest admissible cap.
    bool all_known = !problem.smooth.empty();
    double l_max = 0.0;
    for (const auto& el : problem.smooth) {
      if (el.lipschitz_p < 0.0) all_known = false;
      l_max = std::max(l_max, el.lipschitz_p);
    }
    if (all_known &&
        r.sigma_max > gamma2 * std::max(l_max, sigma0) + tol)
      fail("iteration " + std::to_string(r.k) +
           ": regularization weight exceeds the Lipschitz cap");

    // Forbidden interval for short accepted steps.
    if (r.success && r.exit == "critical") {
      for (size_t i = 0; i < r.res_before.size(); ++i) {
        if (r.res_before[i] >= omega) continue;
        const double after = r.res_after[i];
        if (after > eps * (1.0 + 1e-9) && after < omega * (1.0 - 1e-9))
          fail("iteration " + std::to_string(r.k) + ": residual " +
               std::to_string(i) + " landed in the forbidden interval");
      }
    }
  }

  const int s_eps = count("S_eps");
  if (s_eps > n_hard)
    fail("more freezing successes than hard elements");

  if (why) *why = local;
  return local.empty();
}

SolverReport solve(const Problem& problem, const Eigen::VectorXd& x0,
                   const SolverConfig& config) {
  problem.validate_or_throw();
  config.validate(problem);
  const int p = config.p, q = config.q;
  const double eps = config.eps, delta = config.delta;
  const int lvl = log_level();

  SolverReport rep;
  EvalCounters& counters = rep.counters;

  Eigen::VectorXd x = problem.feasible.project(x0);
  // Fix any residual already inside the activity ball exactly to zero; the
  // kernel-centered feasible set keeps the moved point admissible.
  for (const auto& el : problem.hard) {
    const Eigen::VectorXd r = el.residual(x);
    if (r.norm() <= eps && r.norm() > 0.0) x -= el.U.transpose() * r;
  }
  x = problem.feasible.project(x);

  double f = evaluate_f(problem, x, &counters);
  std::vector<double> sigma(problem.smooth.size(), config.sigma0);

  Ledger& led = rep.ledger;
  led.n_smooth = static_cast<int>(problem.smooth.size());
  led.n_hard = static_cast<int>(problem.hard.size());
  led.eps = eps;
  led.p = p;
  led.q = q;
  led.eta = config.eta;
  led.gamma0 = config.gamma0;
  led.gamma1 = config.gamma1;
  led.gamma2 = config.gamma2;
  led.sigma_min = config.sigma_min;
  led.sigma0 = config.sigma0;
  led.varsigma = sigma_equiv_constant(problem);
  led.kappa_N = sample_kappa_N(problem, x, p, 20240901u);
  led.sigma_max_observed = config.sigma0;

  double cached_psi = -1.0;
  bool psi_valid = false;
  int stagnant = 0;
  rep.status = SolveStatus::IterationCap;

  int k = 0;
  for (; k < config.max_iterations; ++k) {
    if (!psi_valid) {
      cached_psi = psi_measure(problem, x, eps, q, delta, nullptr).psi;
      counters.evals_derivative += 1;
      psi_valid = true;
    }
    if (cached_psi <= eps * chi(q, delta)) {
      rep.status = SolveStatus::Converged;
      break;
    }

    Classification cls = classify(problem, x, eps);
    std::vector<char> mask(problem.hard.size(), 0);
    for (int i : cls.active) mask[i] = 1;
    FullModel model(problem, x, p, sigma, mask);

    StepParams sp;
    sp.eps = eps;
    sp.q = q;
    sp.delta = delta;
    sp.theta = config.theta;
    sp.varpi = config.varpi;
    sp.p = p;
    sp.max_pg_iterations = config.max_inner_iterations;
    StepResult st = compute_step(problem, model, cls.Q, mask, sp, &counters);

    if (st.exit == StepExit::NoDescentStep) {
      // For orders <= 2 the theory rules this out; report and stop rather
      // than cycling.
      rep.status = SolveStatus::ModelCriticalStop;
      break;
    }

    // Working set after the step: the still-active hard elements.
    std::vector<int> active_after;
    for (size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) active_after.push_back(static_cast<int>(i));

    const Eigen::VectorXd xs = x + st.s;
    const double fWp_x = evaluate_f_working(problem, x, active_after, nullptr);
    const double fWp_xs = evaluate_f_working(problem, xs, active_after,
                                             &counters);
    const double delta_f = fWp_x - fWp_xs;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(x.size());
    const double delta_T = model.taylor_value(zero) - model.taylor_value(st.s);
    // Residuals frozen during the step leave the working set: their (large)
    // objective drop is excluded from delta_f and delta_T, which can push
    // delta_T to zero or below.  Such deactivation steps are accepted on the
    // strength of the decrease of the full objective, frozen terms included.
    double frozen_value_drop = 0.0;
    for (int i : st.frozen_now) {
      const auto& el = problem.hard[i];
      frozen_value_drop +=
          el.weight * std::pow(el.residual(x).norm(), el.a);
    }
    bool success;
    if (st.frozen_now.empty()) {
      success = accept_step(delta_f, delta_T, config.eta);
    } else {
      success = (delta_T > 0.0 && delta_f >= config.eta * delta_T) ||
                delta_f + frozen_value_drop >= 0.0;
    }
    const double rho = delta_T != 0.0
                           ? delta_f / delta_T
                           : std::numeric_limits<double>::infinity();

    IterationRecord rec;
    rec.k = k;
    rec.success = success;
    rec.rho = rho;
    rec.norm_s = st.s.norm();
    rec.psi = cached_psi;
    rec.delta_f = delta_f;
    rec.delta_T = delta_T;
    rec.frozen = st.frozen_now;
    rec.exit = st.exit == StepExit::LongStep ? "long" : "critical";
    for (const auto& el : problem.hard) {
      rec.res_before.push_back(el.residual(x).norm());
      rec.res_after.push_back(el.residual(xs).norm());
    }

    // Regularization-weight updates, element by element.
    rec.sigma_increased.assign(problem.smooth.size(), 0);
    const double gamma_up = 0.5 * (config.gamma1 + config.gamma2);
    for (size_t i = 0; i < problem.smooth.size(); ++i) {
      const auto& el = problem.smooth[i];
      const double fi_new = el.oracle->value(el.U * xs);
      const double fi_old = el.oracle->value(el.U * x);
      const double mi = model.smooth_model(static_cast<int>(i), st.s);
      const double mi0 = model.smooth_model(static_cast<int>(i), zero);
      const double dfi = fi_old - fi_new;
      const double dmi = mi0 - mi;
      // Tolerance guards against cancellation noise when the Taylor part
      // reproduces a polynomial element exactly.
      const double utol = 1e-10 * std::max(1.0, std::abs(fi_old));
      if (fi_new > mi + utol) {
        sigma[i] *= gamma_up;
        rec.sigma_increased[i] = 1;
      } else if (success &&
                 ((dfi <= 0.0 && dfi < dmi - config.kappa_big * std::abs(delta_f)) ||
                  (dfi > 0.0 && dfi > dmi + config.kappa_big * std::abs(delta_f)))) {
        sigma[i] = std::max(config.sigma_min, config.gamma0 * sigma[i]);
      }
      led.sigma_max_observed = std::max(led.sigma_max_observed, sigma[i]);
    }
    rec.sigma_max = *std::max_element(sigma.begin(), sigma.end());

    bool sigma_changed = false;
    for (char c : rec.sigma_increased)
      if (c) sigma_changed = true;

    if (success) {
      x = xs;
      f = fWp_xs;  // frozen residuals are exactly zero and contribute nothing
      psi_valid = false;
      stagnant = 0;
      led.kappa_N =
          std::max(led.kappa_N, sample_kappa_N(problem, x, p, 20240901u + k));
    } else if (!sigma_changed) {
      // Identical model next iteration would reproduce the same rejected
      // step; give the decrease branch no chance to cycle.
      if (++stagnant >= 3) {
        rec.f = f;
        led.records.push_back(rec);
        ++k;
        rep.status = SolveStatus::IterationCap;
        break;
      }
    }
    rec.f = f;
    led.records.push_back(rec);

    if (lvl >= 1) {
      std::fprintf(stderr,
                   "k=%d %s rho=%.3e |s|=%.3e f=%.10e psi=%.3e smax=%.3e\n", k,
                   success ? "S" : "U", rho, rec.norm_s, f, cached_psi,
                   rec.sigma_max);
    }
    if (lvl >= 2 && !st.frozen_now.empty()) {
      std::fprintf(stderr, "  frozen:");
      for (int i : st.frozen_now) std::fprintf(stderr, " %d", i);
      std::fprintf(stderr, "\n");
    }
  }

  if (rep.status == SolveStatus::Converged) {
    // already have cached psi at x
  } else if (!psi_valid) {
    cached_psi = psi_measure(problem, x, eps, q, delta, nullptr).psi;
    counters.evals_derivative += 1;
  }

  rep.x = x;
  rep.f = f;
  rep.psi_final = cached_psi;
  rep.iterations = static_cast<int>(led.records.size());
  rep.sigma_final = sigma;

  // Finalize the diagnostics that depend on the whole run.
  double a_min = 1.0;
  for (const auto& el : problem.hard) a_min = std::min(a_min, el.a);
  if (problem.hard.empty()) {
    led.omega = kInf;
  } else {
    led.omega = compute_omega(a_min, led.n_smooth, led.kappa_N,
                              led.sigma_max_observed, p, q);
  }
  led.alpha = 0.75 * led.omega;
  double l_known = 0.0;
  for (const auto& el : problem.smooth)
    l_known = std::max(l_known, std::max(el.lipschitz_p, 0.0));
  double l_hard = 0.0;
  if (!problem.hard.empty() && led.alpha > 0.0 && std::isfinite(led.alpha)) {
    for (const auto& el : problem.hard)
      l_hard = std::max(l_hard, std::abs(tensor::pi_factor(el.a, p + 1)) *
                                     std::pow(led.alpha, el.a - p - 1));
  }
  led.L_alpha = std::max(l_known, l_hard);
  led.kappa_a =
      1.0 + led.n_smooth * std::abs(std::log(config.gamma0)) /
                std::log(config.gamma1);
  led.kappa_b = led.n_smooth / std::log(config.gamma1) *
                std::log(led.sigma_max_observed / config.sigma_min);
  led.kappa_heart =
      std::pow(factorial(p - q + 1) /
                   (led.L_alpha + config.theta + led.sigma_max_observed),
               1.0 / (p - q + 1));
  led.kappa_S =
      factorial(p + 1) /
      (config.eta * config.sigma_min * std::pow(led.varsigma, p + 1)) *
      std::pow(factorial(p - q + 1) /
                   (led.L_alpha + config.theta + led.sigma_max_observed),
               -1.0 / (p - q + 1));

  // Assign categories now that omega is known.
  for (auto& r : led.records) {
    if (!r.success)
      r.category = "U";
    else if (!r.frozen.empty())
      r.category = "S_eps";
    else if (r.norm_s >= 0.25 * led.omega)
      r.category = "S_s";
    else
      r.category = "S_heart";
  }

  return rep;
}

}  // namespace psarp

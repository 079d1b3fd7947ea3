#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psarp/harness.hpp"
#include "psarp/json_io.hpp"
#include "psarp/properties.hpp"
#include "psarp/solver.hpp"

namespace {

std::vector<double> parse_eps_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive-regularization solver for partially separable "
               "problems with non-Lipschitz group terms"};
  app.require_subcommand(1);

  // --- solve ---------------------------------------------------------------
  auto* solve_cmd = app.add_subcommand("solve", "solve a problem from JSON");
  std::string problem_path, solve_out;
  psarp::SolverConfig cfg;
  solve_cmd->add_option("--problem", problem_path, "problem JSON file")
      ->required();
  solve_cmd->add_option("--eps", cfg.eps, "target accuracy");
  solve_cmd->add_option("--p", cfg.p, "model degree");
  solve_cmd->add_option("--q", cfg.q, "criticality order");
  solve_cmd->add_option("--theta", cfg.theta, "inner stopping factor");
  solve_cmd->add_option("--eta", cfg.eta, "acceptance threshold");
  solve_cmd->add_option("--gamma0", cfg.gamma0, "weight decrease factor");
  solve_cmd->add_option("--gamma1", cfg.gamma1, "weight increase lower factor");
  solve_cmd->add_option("--gamma2", cfg.gamma2, "weight increase upper factor");
  solve_cmd->add_option("--sigma0", cfg.sigma0, "initial regularization weight");
  solve_cmd->add_option("--varpi", cfg.varpi, "long-step factor");
  solve_cmd->add_option("--out", solve_out, "report JSON output path");

  // --- sweep ---------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "accuracy sweep on a generated "
                                                "problem");
  std::string gen = "group-lasso", eps_csv = "1e-1,1e-2,1e-3", sweep_out;
  int groups = 5, gsize = 4, dim = -1, kappa_rows = -1;
  double lambda = 0.5, a_exp = 0.5;
  unsigned seed = 7;
  psarp::SolverConfig sweep_cfg;
  sweep_cmd->add_option("--gen", gen, "generator: group-lasso | row-sparse");
  sweep_cmd->add_option("--groups", groups, "number of hard groups / rows");
  sweep_cmd->add_option("--gsize", gsize, "group size / columns");
  sweep_cmd->add_option("--n", dim, "ambient dimension (group-lasso)");
  sweep_cmd->add_option("--rows", kappa_rows, "regression rows (row-sparse)");
  sweep_cmd->add_option("--lambda", lambda, "hard-element weight");
  sweep_cmd->add_option("--a", a_exp, "hard-element exponent");
  sweep_cmd->add_option("--eps", eps_csv, "comma-separated accuracies");
  sweep_cmd->add_option("--seed", seed, "generator seed");
  sweep_cmd->add_option("--p", sweep_cfg.p, "model degree");
  sweep_cmd->add_option("--q", sweep_cfg.q, "criticality order");
  sweep_cmd->add_option("--out", sweep_out, "CSV output path");

  // --- check ---------------------------------------------------------------
  auto* check_cmd = app.add_subcommand("check", "run a property suite");
  std::string suite;
  check_cmd->add_option("--suite", suite, "tensors | model | criticality | ledger")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      psarp::Problem problem = psarp::load_problem(problem_path);
      Eigen::VectorXd x0 = Eigen::VectorXd::Zero(problem.n);
      // Start from the projected origin nudged off every hard singularity.
      x0 = problem.feasible.project(Eigen::VectorXd::Constant(problem.n, 0.5));
      psarp::SolverReport rep = psarp::solve(problem, x0, cfg);
      psarp::write_run_log(std::cout, rep.ledger);
      if (!solve_out.empty()) {
        std::ofstream f(solve_out);
        f << psarp::report_to_json(rep).dump(2) << "\n";
      }
      std::cerr << "status="
                << (rep.status == psarp::SolveStatus::Converged
                        ? "Converged"
                        : rep.status == psarp::SolveStatus::IterationCap
                              ? "IterationCap"
                              : "ModelCriticalStop")
                << " f=" << rep.f << " psi=" << rep.psi_final
                << " iterations=" << rep.iterations << "\n";
      return rep.status == psarp::SolveStatus::Converged ? 0 : 2;
    }

    if (*sweep_cmd) {
      psarp::Experiment ex;
      if (gen == "group-lasso") {
        const int n = dim > 0 ? dim : groups * gsize;
        ex.generated = psarp::gen_group_lasso(groups, gsize, n, lambda, a_exp,
                                              seed);
      } else if (gen == "row-sparse") {
        const int rows = kappa_rows > 0 ? kappa_rows : groups + 1;
        ex.generated = psarp::gen_row_sparse_regression(groups, gsize, rows,
                                                        lambda, a_exp, seed);
      } else {
        std::cerr << "unknown generator: " << gen << "\n";
        return 1;
      }
      ex.eps_values = parse_eps_list(eps_csv);
      ex.config = sweep_cfg;
      ex.csv_path = sweep_out;
      psarp::SweepReport rep = psarp::run_sweep(ex);
      if (sweep_out.empty()) std::cout << psarp::sweep_to_csv(rep);
      std::cerr << psarp::sweep_to_json(rep).dump(2) << "\n";
      return 0;
    }

    if (*check_cmd) {
      bool ok = false;
      if (suite == "tensors")
        ok = psarp::run_tensor_suite(std::cout);
      else if (suite == "model")
        ok = psarp::run_model_suite(std::cout);
      else if (suite == "criticality")
        ok = psarp::run_criticality_suite(std::cout);
      else if (suite == "ledger")
        ok = psarp::run_ledger_suite(std::cout);
      else {
        std::cerr << "unknown suite: " << suite << "\n";
        return 1;
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

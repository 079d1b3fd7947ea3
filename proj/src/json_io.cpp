#include "psarp/json_io.hpp"

#include <fstream>
#include <ostream>

#include "psarp/errors.hpp"

namespace psarp {

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw DomainError("matrix field must be a nonempty array of rows");
  const size_t rows = j.size();
  const size_t cols = j[0].size();
  Eigen::MatrixXd M(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw DomainError("ragged matrix in JSON");
    for (size_t c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
  }
  return M;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t t = 0; t < j.size(); ++t) v[t] = j[t].get<double>();
  return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index t = 0; t < v.size(); ++t) out.push_back(v[t]);
  return out;
}

}  // namespace

Problem problem_from_json(const nlohmann::json& j) {
  Problem problem;
  problem.n = j.at("n").get<int>();
  const double lambda = j.value("lambda", 1.0);

  if (j.contains("feasible")) {
    const auto& jf = j.at("feasible");
    const std::string kind = jf.at("kind").get<std::string>();
    if (kind == "whole") {
      problem.feasible = FeasibleSet::whole_space(problem.n);
    } else if (kind == "box") {
      problem.feasible = FeasibleSet::box(vector_from_json(jf.at("lo")),
                                          vector_from_json(jf.at("hi")));
    } else {
      throw DomainError("feasible.kind must be \"whole\" or \"box\"");
    }
  } else {
    problem.feasible = FeasibleSet::whole_space(problem.n);
  }

  for (const auto& je : j.at("elements")) {
    const std::string kind = je.at("kind").get<std::string>();
    if (kind == "smooth") {
      SmoothElement el;
      el.U = matrix_from_json(je.at("U"));
      el.oracle_name = je.at("oracle").get<std::string>();
      const auto& params = je.at("params");
      if (el.oracle_name == "quadratic") {
        el.oracle = std::make_shared<QuadraticOracle>(
            matrix_from_json(params.at("H")), vector_from_json(params.at("c")));
        el.lipschitz_p = je.value("lipschitz_p", 0.0);
      } else if (el.oracle_name == "quartic_well") {
        el.oracle =
            std::make_shared<QuarticWellOracle>(vector_from_json(params.at("w")));
        el.lipschitz_p = je.value("lipschitz_p", 6.0);
      } else {
        throw DomainError("unknown smooth oracle: " + el.oracle_name);
      }
      problem.smooth.push_back(std::move(el));
    } else if (kind == "hard") {
      HardElement el;
      el.U = matrix_from_json(je.at("U"));
      el.b = je.contains("b") ? vector_from_json(je.at("b"))
                              : Eigen::VectorXd(Eigen::VectorXd::Zero(el.U.rows()));
      el.a = je.at("a").get<double>();
      el.weight = je.value("weight", 1.0) * lambda;
      problem.hard.push_back(std::move(el));
    } else {
      throw DomainError("element kind must be \"smooth\" or \"hard\"");
    }
  }
  return problem;
}

nlohmann::json problem_to_json(const Problem& problem) {
  nlohmann::json j;
  j["n"] = problem.n;
  j["lambda"] = 1.0;  // weights are stored per element below
  nlohmann::json elements = nlohmann::json::array();
  for (const auto& el : problem.smooth) {
    nlohmann::json je;
    je["kind"] = "smooth";
    je["U"] = matrix_to_json(el.U);
    je["oracle"] = el.oracle_name;
    je["lipschitz_p"] = el.lipschitz_p;
    nlohmann::json params;
    if (el.oracle_name == "quadratic") {
      const auto* o = dynamic_cast<const QuadraticOracle*>(el.oracle.get());
      if (!o) throw DomainError("oracle tag does not match oracle type");
      params["H"] = matrix_to_json(o->H());
      params["c"] = vector_to_json(o->c());
    } else if (el.oracle_name == "quartic_well") {
      const auto* o = dynamic_cast<const QuarticWellOracle*>(el.oracle.get());
      if (!o) throw DomainError("oracle tag does not match oracle type");
      params["w"] = vector_to_json(o->w());
    } else {
      throw DomainError("cannot serialize oracle: " + el.oracle_name);
    }
    je["params"] = params;
    elements.push_back(je);
  }
  for (const auto& el : problem.hard) {
    nlohmann::json je;
    je["kind"] = "hard";
    je["U"] = matrix_to_json(el.U);
    je["b"] = vector_to_json(el.b);
    je["a"] = el.a;
    je["weight"] = el.weight;
    elements.push_back(je);
  }
  j["elements"] = elements;
  nlohmann::json jf;
  if (problem.feasible.is_whole()) {
    jf["kind"] = "whole";
  } else {
    jf["kind"] = "box";
    jf["lo"] = vector_to_json(problem.feasible.lower());
    jf["hi"] = vector_to_json(problem.feasible.upper());
  }
  j["feasible"] = jf;
  return j;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open problem file: " + path);
  nlohmann::json j;
  in >> j;
  return problem_from_json(j);
}

nlohmann::json report_to_json(const SolverReport& report) {
  nlohmann::json j;
  j["x"] = vector_to_json(report.x);
  j["f"] = report.f;
  j["psi_final"] = report.psi_final;
  switch (report.status) {
    case SolveStatus::Converged: j["status"] = "Converged"; break;
    case SolveStatus::ModelCriticalStop: j["status"] = "ModelCriticalStop"; break;
    case SolveStatus::IterationCap: j["status"] = "IterationCap"; break;
  }
  j["iterations"] = report.iterations;
  j["evals_f"] = report.counters.evals_f;
  j["evals_derivative"] = report.counters.evals_derivative;
  j["sigma_final"] = report.sigma_final;

  const Ledger& led = report.ledger;
  nlohmann::json jl;
  jl["successful"] = led.successful();
  jl["unsuccessful"] = led.unsuccessful();
  jl["S_eps"] = led.count("S_eps");
  jl["S_s"] = led.count("S_s");
  jl["S_heart"] = led.count("S_heart");
  jl["varsigma"] = led.varsigma;
  jl["kappa_N"] = led.kappa_N;
  jl["sigma_max_observed"] = led.sigma_max_observed;
  jl["omega"] = std::isfinite(led.omega) ? led.omega : -1.0;
  jl["alpha"] = std::isfinite(led.alpha) ? led.alpha : -1.0;
  jl["L_alpha"] = led.L_alpha;
  jl["kappa_a"] = led.kappa_a;
  jl["kappa_b"] = led.kappa_b;
  jl["kappa_heart"] = led.kappa_heart;
  jl["kappa_S"] = led.kappa_S;
  j["ledger"] = jl;
  return j;
}

void write_run_log(std::ostream& os, const Ledger& ledger) {
  for (const auto& r : ledger.records) {
    nlohmann::json j;
    j["k"] = r.k;
    j["success"] = r.success;
    j["rho"] = r.rho;
    j["norm_s"] = r.norm_s;
    j["f"] = r.f;
    j["psi"] = r.psi;
    j["sigma_max"] = r.sigma_max;
    j["frozen"] = r.frozen;
    j["class"] = r.category;
    os << j.dump() << "\n";
  }
}

}  // namespace psarp

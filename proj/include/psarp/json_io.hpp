#pragma once

// JSON serialization of problems, solver reports, and the per-iteration run
// log (one JSON object per line).

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "psarp/problem.hpp"
#include "psarp/solver.hpp"

namespace psarp {

// Schema: {n, elements:[{kind:"smooth"|"hard", U:[[...]], b:[...], a,
// oracle:"quadratic"|"quartic_well", params:{...}}], feasible:{kind:
// "whole"|"box", lo:[...], hi:[...]}, lambda}.  lambda scales every hard
// element's weight and defaults to 1.
Problem problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const Problem& problem);

Problem load_problem(const std::string& path);

nlohmann::json report_to_json(const SolverReport& report);

// One line per iteration:
// {"k":..,"success":..,"rho":..,"norm_s":..,"f":..,"psi":..,
//  "sigma_max":..,"frozen":[..],"class":"S_eps"|"S_s"|"S_heart"|"U"}
void write_run_log(std::ostream& os, const Ledger& ledger);

}  // namespace psarp

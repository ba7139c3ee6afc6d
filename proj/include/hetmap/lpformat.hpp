#pragma once

#include <string>

#include "hetmap/milp.hpp"
#include "hetmap/solver.hpp"

namespace hetmap {

// CPLEX-style LP text: Minimize / Subject To / Bounds / Binaries / End,
// coefficients rendered with 17 significant digits for lossless re-reading.
std::string export_lp(const MilpModel& model);
void export_lp(const MilpModel& model, const std::string& path);

// Parses the subset of the LP format produced by export_lp (plus modest
// hand-written variations). Errors carry 1-based line numbers.
MilpModel read_lp(const std::string& text);
MilpModel read_lp_file(const std::string& path);

// Solution listing: one "name value" pair per line, '#' comments.
std::string export_solution(const Solution& sol, const MilpModel& model);
void export_solution(const Solution& sol, const MilpModel& model,
                     const std::string& path);

// Parses a listing against `model`; unknown names are errors, absent
// variables default to 0. The point is validated against every constraint
// and bound at tolerance 1e-6; a violation yields status Infeasible with the
// violated row named in `note`.
Solution import_solution(const std::string& text, const MilpModel& model);
Solution import_solution_file(const std::string& path, const MilpModel& model);

// Shared file helpers (workbench convenience).
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace hetmap

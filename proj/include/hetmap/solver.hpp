#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetmap/evaluator.hpp"
#include "hetmap/milp.hpp"

namespace hetmap {

struct Solution {
    enum class Status { Optimal, Feasible, Infeasible, Unbounded, TimeLimit };
    Status status = Status::Infeasible;
    double objective = kInf;
    double best_bound = -kInf;
    std::vector<double> values; // indexed by model var id
    long nodes_explored = 0;
    double wall_time = 0.0;
    std::string note;
};

const char* status_name(Solution::Status s);

struct SolverOptions {
    double time_limit = 60.0;    // seconds, > 0
    double gap = 1e-6;           // relative optimality gap
    long node_limit = -1;        // < 0: unlimited (deterministic cutoff)
    long enum_budget = 10000000; // exhaustive assignment cap
};

enum class Formulation { Device, Time, TimeStreaming };

Formulation formulation_from_name(const std::string& name);
const char* formulation_name(Formulation f);

// Earliest start/end recurrence for a fixed assignment; equals the minimal
// feasible z of the (all-pairs) time-based model for that assignment.
// unit_of: unit index per node; order: topological. Returns z and fills
// y (2 entries per node: start, end) when non-null.
double schedule_from_assignment(const AppGraph& g, const TimingView& view,
                                const std::vector<int>& unit_of,
                                const std::vector<int>& order, bool streaming,
                                std::vector<double>* y = nullptr);

// Exhaustive enumeration over compatible assignments honoring capacity.
std::pair<Solution, Mapping> solve_exhaustive(const AppGraph& g,
                                              const Platform& pf,
                                              const TimingModel& tm,
                                              Formulation form,
                                              const SolverOptions& opt = {},
                                              std::optional<uint64_t> order_seed
                                              = std::nullopt);

// Optional domain context that lets the MILP search repair/polish incumbents.
struct BnbContext {
    const AppGraph* graph = nullptr;
    const Platform* platform = nullptr;
    const TimingModel* timing = nullptr;
    const BuildMaps* maps = nullptr;
};

// LP-relaxation branch and bound over the model's binaries.
Solution solve_bnb(const MilpModel& model, const SolverOptions& opt = {},
                   const BnbContext& ctx = {});

// First-improvement hill climbing over single-node moves, scored by evaluate.
struct LocalSearchOptions {
    long move_budget = 100000;
    EvalOptions eval;
};

Mapping improve_local(const AppGraph& g, const Platform& pf,
                      const TimingModel& tm, const Mapping& start,
                      const LocalSearchOptions& opt = {});

} // namespace hetmap

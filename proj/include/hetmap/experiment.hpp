#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetmap/appgraph.hpp"
#include "hetmap/milp.hpp"
#include "hetmap/platform.hpp"
#include "hetmap/solver.hpp"

namespace hetmap {

struct ExperimentConfig {
    std::string platform = "CG"; // preset name or platform JSON file path
    int edges = 30;              // skeleton size parameter m
    int count = 100;             // graphs per run
    uint64_t seed = 1;
    double source_bytes = 100e6;
    bool fixed_task_load = true; // give every task the same input load
    double task_load_bytes = 100e6;
    bool constant_complexity = false; // c == complexity_value instead of
    double complexity_value = 1.0;    // c ~ LogNormal(3, 0.5)
    std::vector<Formulation> strategies = {Formulation::Device,
                                           Formulation::Time};
    enum class Mode { Bnb, Exhaustive, External };
    Mode mode = Mode::Bnb;
    SolverOptions solver;
    TimeOptions time_model{TimeOptions::Pairs::PathPruned,
                           TimeOptions::OrderingScope::ProcOnly};
    bool bus_overlap = false;
    bool include_timings = true; // false pins report bytes across runs
    int threads = 1;
};

struct ExperimentRow {
    uint64_t graph_seed = 0;
    int nodes = 0;             // expanded graph
    int edges = 0;             // expanded graph
    double baseline_s = 0.0;   // all-CPU makespan
    std::string strategy;
    bool ok = false;
    double makespan_s = 0.0;
    double pct_change = 0.0;   // (baseline - strategy) / baseline * 100
    double same_unit_frac = 0.0;
    std::string status;
    double solve_s = 0.0;
    std::string note;
};

struct ExperimentAggregate {
    std::string strategy;
    int count = 0;    // rows for this strategy
    int successes = 0;
    int improved = 0; // pct_change strictly positive
    int failures = 0;
    double avg_pct = 0.0, min_pct = 0.0, max_pct = 0.0;
    double avg_same_unit_frac = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ExperimentRow> rows; // graph-major, strategy order within
    std::vector<ExperimentAggregate> aggregates;
};

// Resolves a preset name or falls back to reading a platform JSON file.
Platform resolve_platform(const std::string& name_or_path);

// Runs the HETMAP_EXTERNAL_SOLVER command template on `model`: the value is a
// shell command with {lp} and {sol} placeholders; the command must read the
// LP file and leave a "name value" solution listing at the {sol} path.
Solution solve_external(const MilpModel& model);

ExperimentReport run_experiment(const ExperimentConfig& config);

// CSV: seed,nodes,edges,baseline_s,strategy,makespan_s,pct_change,status,solve_s
std::string report_csv(const ExperimentReport& report);
std::string report_json(const ExperimentReport& report);

std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);

} // namespace hetmap

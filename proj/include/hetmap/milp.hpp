#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetmap/evaluator.hpp"
#include "hetmap/timing.hpp"

namespace hetmap {

struct MilpVar {
    enum class Kind { Binary, Continuous };
    int id = 0;
    Kind kind = Kind::Continuous;
    double lo = 0.0;
    double hi = kInf;
    std::string name;
};

struct MilpConstraint {
    enum class Sense { LE, EQ, GE };
    std::vector<std::pair<int, double>> terms; // (var id, coefficient)
    Sense sense = Sense::LE;
    double rhs = 0.0;
    std::string name;
};

struct MilpModel {
    enum class Form { Generic, Device, Time };
    Form form = Form::Generic;
    std::vector<MilpVar> vars;
    std::vector<MilpConstraint> cons;
    std::vector<std::pair<int, double>> objective; // minimize
    std::map<std::pair<int, int>, int> mccormick_memo;

    int add_binary(const std::string& name);
    int add_continuous(const std::string& name, double lo, double hi);
    int add_con(std::vector<std::pair<int, double>> terms,
                MilpConstraint::Sense sense, double rhs,
                const std::string& name);
    int var_by_name(const std::string& name) const; // -1 when absent

    double objective_value(const std::vector<double>& values) const;
    // First violated constraint or bound at tolerance `tol`, else nullopt.
    std::optional<std::string> check_point(const std::vector<double>& values,
                                           double tol = 1e-6) const;
};

// Linearized product of two binaries; memoized per unordered pair.
int mccormick(MilpModel& model, int a, int b);

struct TimeOptions {
    enum class Pairs { All, PathPruned };
    enum class OrderingScope { AllUnits, ProcOnly };
    Pairs pairs = Pairs::All;
    OrderingScope scope = OrderingScope::AllUnits;
};

struct BuildMaps {
    MilpModel::Form form = MilpModel::Form::Generic;
    std::vector<std::string> units; // unit index -> id
    std::map<std::pair<int, int>, int> x;        // (node, unit) -> var
    std::map<std::array<int, 4>, int> w;         // (i, p, j, q) -> var
    std::map<std::pair<int, int>, int> y;        // (node, 0|1) -> var
    int z = -1;
    std::vector<int> order;                      // time-based only
    TimeOptions options;
    bool streaming = false;
    std::map<std::pair<int, int>, int> edge_row; // edge -> constraint index
    // same-unit big-M disjunctions: (row, i, j, unit)
    std::vector<std::array<int, 4>> ordering_rows;
};

std::pair<MilpModel, BuildMaps> build_device_based(const AppGraph& g,
                                                   const Platform& pf,
                                                   const TimingModel& tm);

std::pair<MilpModel, BuildMaps> build_time_based(const AppGraph& g,
                                                 const Platform& pf,
                                                 const TimingModel& tm,
                                                 const std::vector<int>& order,
                                                 const TimeOptions& options = {});

// Rewrites edge precedence rows with the dataflow streaming credit, adds
// parent-end rows, and drops same-unit disjunctions on dataflow procs.
void add_streaming_extension(MilpModel& model, BuildMaps& maps,
                             const AppGraph& g, const Platform& pf,
                             const TimingModel& tm);

// Upper bound on any optimal makespan: sum of worst exec times plus sum of
// worst finite transports over edges.
double big_M(const AppGraph& g, const Platform& pf, const TimingModel& tm);

struct Solution; // solver module

Mapping extract_mapping(const Solution& sol, const BuildMaps& maps);

// Closed-form device-based objective for a fixed assignment
// (unit index per node); kInf when a required transport is missing.
double device_objective(const TimingView& view,
                        const std::vector<int>& unit_of);

// Streaming credit on edge (i, j) for dataflow unit u: the exec time on u of
// the task owning the streamed data; 0 when it does not apply.
double streaming_credit(const AppGraph& g, const TimingView& view, int i,
                        int j, int u);

// Cluster of a dataflow proc: the proc itself plus its associated memories.
std::vector<std::vector<int>> dataflow_clusters(const TimingView& view);

} // namespace hetmap

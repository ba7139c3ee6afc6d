#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetmap/common.hpp"
#include "hetmap/rng.hpp"

namespace hetmap {

enum class NodeKind { Source, Sink, InputMem, Compute, OutputMem };

inline bool is_memory_role(NodeKind k) { return k != NodeKind::Compute; }

const char* kind_name(NodeKind k);
NodeKind kind_from_name(const std::string& name);

// Per-task attributes; present exactly on Compute nodes.
struct TaskAttrs {
    double parallelizability = 0.0; // p in [0,1]
    double complexity = 1.0;        // c, operations per input byte
    double data_ratio = 1.0;        // output bytes per input byte
    double streamability = 1.0;     // pipeline-step divisor, >= 1
    double area = 0.0;              // area units on dataflow devices

    bool operator==(const TaskAttrs&) const = default;
};

struct Node {
    int id = 0;
    NodeKind kind = NodeKind::Compute;
    double data_bytes = 0.0;
    std::optional<TaskAttrs> attrs;

    bool operator==(const Node&) const = default;
};

struct AppGraph {
    std::vector<Node> nodes;                 // ids dense, nodes[i].id == i
    std::vector<std::pair<int, int>> edges;  // sorted, unique

    int add_node(NodeKind kind, double bytes = 0.0,
                 std::optional<TaskAttrs> attrs = std::nullopt);
    void add_edge(int from, int to);
    void sort_edges();

    std::vector<std::vector<int>> successors() const;
    std::vector<std::vector<int>> predecessors() const;

    bool operator==(const AppGraph&) const = default;
};

struct Violation {
    std::string code;    // stable identifier, e.g. "not_a_dag"
    std::string message; // human-readable, names nodes/edges involved
};

// Structural validation; empty result means the graph is well formed.
std::vector<Violation> validate(const AppGraph& g);

// Kahn layer-by-layer topological order. Within a layer nodes are sorted by
// id; with a seed each layer is shuffled by a deterministic PRNG.
std::vector<int> topsort_bfs(const AppGraph& g,
                             std::optional<uint64_t> seed = std::nullopt);

// Random series-parallel skeleton: plain DAG, one source, one sink, internal
// nodes carry kind Compute with no attrs yet.
AppGraph gen_series_parallel(int target_edges, uint64_t seed);

using AttrsSampler = std::function<TaskAttrs()>;

// Default parameter distributions: p ~ U[0,1], c ~ LogNormal(mu=3, sigma=0.5),
// data_ratio = 1, streamability = max(1, c), area = c.
AttrsSampler default_sampler(Rng& rng);

// Samples a constant complexity instead of the log-normal (p stays uniform).
AttrsSampler constant_complexity_sampler(Rng& rng, double c);

// Turns every internal skeleton node into an InputMem -> Compute -> OutputMem
// triple and propagates data sizes from the sources.
AppGraph expand_tasks(const AppGraph& skeleton, const AttrsSampler& sampler,
                      double source_bytes);

// Fixed-load mode: every task carries `bytes` input data regardless of
// propagation (sources included); OutputMem scales by data_ratio, sinks sum.
void set_uniform_load(AppGraph& g, double bytes);

// Recomputes data_bytes from current source bytes and data_ratio values.
void propagate_bytes(AppGraph& g);

} // namespace hetmap

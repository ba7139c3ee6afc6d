#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetmap/appgraph.hpp"
#include "hetmap/platform.hpp"
#include "hetmap/timing.hpp"

namespace hetmap {

// Node id -> unit id assignment.
struct Mapping {
    std::map<int, std::string> at;

    bool operator==(const Mapping&) const = default;
};

enum class EventKind { Compute, Read, Write, Transfer };

const char* event_kind_name(EventKind k);

struct Event {
    int node = 0;
    std::string unit;
    double start = 0.0;
    double end = 0.0;
    EventKind kind = EventKind::Compute;

    bool operator==(const Event&) const = default;
};

struct Timeline {
    std::map<std::string, double> clocks;  // final per-unit time values
    std::vector<Event> events;
    std::map<int, double> data_ready;      // node id -> data availability
    std::string note;                      // e.g. the offending infinite edge
};

struct EvalOptions {
    bool bus_overlap = false;
    bool streaming = false;
    std::optional<uint64_t> order_seed;
};

struct EvalResult {
    double makespan = 0.0;
    Timeline timeline;
};

// Mapping checks: totality, compatibility, dataflow capacity. Empty = valid.
std::vector<Violation> verify_mapping(const AppGraph& g, const Platform& pf,
                                      const TimingModel& tm, const Mapping& m);

// Result of collapsing streamable chains; ids in `graph` are fresh.
struct Compressed {
    AppGraph graph;
    Mapping mapping;           // remapped onto the new ids
    TimingModel timing;        // remapped tables + merged exec overrides
    std::vector<int> origin;   // new node id -> representative original id
};

// Streaming compression: maximal same-unit chains of streamable tasks merge
// into one task. On dataflow units the merged cost is the max member cost and
// chains split greedily at the area capacity; elsewhere the merged cost is the
// sum of member costs (intermediate memory traffic is skipped).
Compressed compress_streams(const AppGraph& g, const Mapping& m,
                            const Platform& pf, const TimingModel& tm);

// Algorithm-1 makespan of a mapping, with optional extensions.
EvalResult evaluate(const AppGraph& g, const Platform& pf,
                    const TimingModel& tm, const Mapping& m,
                    const EvalOptions& opt = {});

// All computes on `proc`, all memory-role nodes on `mem`.
Mapping uniform_mapping(const AppGraph& g, const std::string& proc,
                        const std::string& mem);

// Baseline of the experiment protocol: first proc unit + its first memory.
Mapping all_cpu_mapping(const AppGraph& g, const Platform& pf);

} // namespace hetmap

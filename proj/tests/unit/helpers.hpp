#pragma once

// Shared builders for the unit tests: a tiny hand platform with round
// numbers (clock 1 Hz, memory rate 1 B/s) so expected times are exact,
// plus task-graph builders for single tasks, parallel pairs, and chains.

#include <string>
#include <vector>

#include "hetmap/appgraph.hpp"
#include "hetmap/evaluator.hpp"
#include "hetmap/platform.hpp"
#include "hetmap/timing.hpp"

namespace testutil {

using namespace hetmap;

// p1: clock 1 (exec = c * bytes), m1: rate 1 (1 s per byte).
// With `two_procs`: p2 at clock 2 and m2 at rate 2, m1-m2 linked.
inline Platform hand_platform(bool two_procs = true, bool linked = true) {
    Platform pf;
    ProcUnit p1;
    p1.id = "p1";
    p1.clock = 1.0;
    pf.procs.push_back(p1);
    MemoryUnit m1;
    m1.id = "m1";
    m1.explicit_rate = 1.0;
    pf.memories.push_back(m1);
    pf.assoc.push_back({"p1", {"m1"}});
    if (two_procs) {
        ProcUnit p2;
        p2.id = "p2";
        p2.clock = 2.0;
        pf.procs.push_back(p2);
        MemoryUnit m2;
        m2.id = "m2";
        m2.explicit_rate = 2.0;
        pf.memories.push_back(m2);
        pf.assoc.push_back({"p2", {"m2"}});
        if (linked) pf.links.push_back({"m1", "m2", kInf});
    }
    return pf;
}

// One dataflow proc "f" (clock 1, capacity `cap`) with memory "fm" whose
// rate is high enough that boundary transfers are negligible.
inline Platform dataflow_platform(double cap = 100.0, double mem_rate = 1e9) {
    Platform pf;
    ProcUnit f;
    f.id = "f";
    f.clock = 1.0;
    f.dataflow = true;
    f.area_capacity = cap;
    pf.procs.push_back(f);
    MemoryUnit fm;
    fm.id = "fm";
    fm.explicit_rate = mem_rate;
    pf.memories.push_back(fm);
    pf.assoc.push_back({"f", {"fm"}});
    return pf;
}

inline TaskAttrs attrs(double c, double p = 0.0, double ratio = 1.0,
                       double stream = 1.0, double area = 0.0) {
    TaskAttrs a;
    a.parallelizability = p;
    a.complexity = c;
    a.data_ratio = ratio;
    a.streamability = stream;
    a.area = area;
    return a;
}

// source -> IM -> C -> OM -> sink, ids 0..4.
inline AppGraph single_task(double bytes, const TaskAttrs& a) {
    AppGraph g;
    int s = g.add_node(NodeKind::Source, bytes);
    int im = g.add_node(NodeKind::InputMem);
    int c = g.add_node(NodeKind::Compute, 0.0, a);
    int om = g.add_node(NodeKind::OutputMem);
    int k = g.add_node(NodeKind::Sink);
    g.add_edge(s, im);
    g.add_edge(im, c);
    g.add_edge(c, om);
    g.add_edge(om, k);
    g.sort_edges();
    propagate_bytes(g);
    return g;
}

// source -> task_1 -> task_2 -> ... -> sink; node ids are
// 0 (source), then 3 per task (IM, C, OM), then the sink.
inline AppGraph chain_tasks(double bytes, const std::vector<TaskAttrs>& as) {
    AppGraph g;
    int s = g.add_node(NodeKind::Source, bytes);
    int prev = s;
    for (const TaskAttrs& a : as) {
        int im = g.add_node(NodeKind::InputMem);
        int c = g.add_node(NodeKind::Compute, 0.0, a);
        int om = g.add_node(NodeKind::OutputMem);
        g.add_edge(prev, im);
        g.add_edge(im, c);
        g.add_edge(c, om);
        prev = om;
    }
    int k = g.add_node(NodeKind::Sink);
    g.add_edge(prev, k);
    g.sort_edges();
    propagate_bytes(g);
    return g;
}

// source fans out to independent tasks that all join at the sink.
inline AppGraph parallel_tasks(double bytes, const std::vector<TaskAttrs>& as) {
    AppGraph g;
    int s = g.add_node(NodeKind::Source, bytes);
    std::vector<int> outs;
    for (const TaskAttrs& a : as) {
        int im = g.add_node(NodeKind::InputMem);
        int c = g.add_node(NodeKind::Compute, 0.0, a);
        int om = g.add_node(NodeKind::OutputMem);
        g.add_edge(s, im);
        g.add_edge(im, c);
        g.add_edge(c, om);
        outs.push_back(om);
    }
    int k = g.add_node(NodeKind::Sink);
    for (int om : outs) g.add_edge(om, k);
    g.sort_edges();
    propagate_bytes(g);
    return g;
}

// Pins every node of `g` to one unit via the timing compatibility rules:
// computes to `proc`, memory roles to `mem`.
inline void force_uniform(TimingModel& tm, const AppGraph& g,
                          const std::string& proc, const std::string& mem) {
    for (const Node& n : g.nodes)
        tm.rules.allow[n.id] = {n.kind == NodeKind::Compute ? proc : mem};
}

} // namespace testutil

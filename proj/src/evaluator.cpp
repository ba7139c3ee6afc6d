#include "hetmap/evaluator.hpp"

#include <algorithm>
#include <array>

namespace hetmap {

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Compute: return "compute";
        case EventKind::Read: return "read";
        case EventKind::Write: return "write";
        case EventKind::Transfer: return "transfer";
    }
    return "?";
}

std::vector<Violation> verify_mapping(const AppGraph& g, const Platform& pf,
                                      const TimingModel& tm, const Mapping& m) {
    std::vector<Violation> out;
    TimingView view(g, pf, tm);

    for (const auto& [node, unit] : m.at) {
        if (node < 0 || node >= static_cast<int>(g.nodes.size()))
            out.push_back({"unknown_node",
                           "mapping references unknown node " + std::to_string(node)});
        else if (view.unit_index(unit) < 0)
            out.push_back({"unknown_unit", "node " + std::to_string(node) +
                                               " mapped to unknown unit " + unit});
    }
    for (const Node& n : g.nodes) {
        auto it = m.at.find(n.id);
        if (it == m.at.end()) {
            out.push_back({"unmapped_node",
                           "node " + std::to_string(n.id) + " has no unit"});
            continue;
        }
        int u = view.unit_index(it->second);
        if (u < 0) continue; // reported above
        if (!view.compatible(n.id, u))
            out.push_back({"incompatible",
                           "node " + std::to_string(n.id) + " (" +
                               kind_name(n.kind) + ") cannot run on " + it->second});
    }
    for (const ProcUnit& p : pf.procs) {
        if (!p.dataflow) continue;
        double total = 0.0;
        for (const Node& n : g.nodes) {
            if (n.kind != NodeKind::Compute || !n.attrs) continue;
            auto it = m.at.find(n.id);
            if (it != m.at.end() && it->second == p.id) total += n.attrs->area;
        }
        if (total > p.area_capacity)
            out.push_back({"capacity",
                           "device " + p.id + " over capacity: " +
                               std::to_string(total) + " > " +
                               std::to_string(p.area_capacity)});
    }
    return out;
}

namespace {

std::string join_violations(const std::vector<Violation>& vs) {
    std::string msg;
    for (const Violation& v : vs) {
        if (!msg.empty()) msg += "; ";
        msg += v.message;
    }
    return msg;
}

} // namespace

Compressed compress_streams(const AppGraph& g, const Mapping& m,
                            const Platform& pf, const TimingModel& tm) {
    TimingView view(g, pf, tm);
    auto succ = g.successors();
    auto pred = g.predecessors();
    int n = static_cast<int>(g.nodes.size());

    auto unit_of = [&](int node) -> int {
        auto it = m.at.find(node);
        return it == m.at.end() ? -1 : view.unit_index(it->second);
    };
    auto streamable = [&](int node) {
        const Node& nd = g.nodes[node];
        return nd.kind == NodeKind::Compute && nd.attrs &&
               nd.attrs->streamability > 1.0;
    };

    // chain successor of compute c via an exclusive intermediate memory
    auto chain_next = [&](int c) -> int {
        if (succ[c].size() != 1) return -1;
        int out = succ[c][0];
        if (g.nodes[out].kind != NodeKind::OutputMem || succ[out].size() != 1)
            return -1;
        int in = succ[out][0];
        if (g.nodes[in].kind != NodeKind::InputMem || pred[in].size() != 1 ||
            succ[in].size() != 1)
            return -1;
        int b = succ[in][0];
        if (g.nodes[b].kind != NodeKind::Compute) return -1;
        if (!streamable(c) || !streamable(b)) return -1;
        if (unit_of(c) < 0 || unit_of(c) != unit_of(b)) return -1;
        return b;
    };

    std::vector<int> next(n, -1), prev(n, -1);
    for (const Node& nd : g.nodes) {
        if (nd.kind != NodeKind::Compute) continue;
        int b = chain_next(nd.id);
        if (b >= 0) {
            next[nd.id] = b;
            prev[b] = nd.id;
        }
    }

    // segments of length >= 2, split greedily at dataflow capacity
    std::vector<std::vector<int>> segments;
    for (const Node& nd : g.nodes) {
        if (nd.kind != NodeKind::Compute || prev[nd.id] >= 0) continue;
        std::vector<int> chain;
        for (int c = nd.id; c >= 0; c = next[c]) chain.push_back(c);
        if (chain.size() < 2) continue;
        int u = unit_of(chain[0]);
        if (view.dataflow(u)) {
            double cap = view.capacity(u);
            std::vector<int> seg;
            double used = 0.0;
            for (int c : chain) {
                double a = g.nodes[c].attrs->area;
                if (!seg.empty() && used + a > cap) {
                    if (seg.size() >= 2) segments.push_back(seg);
                    seg.clear();
                    used = 0.0;
                }
                seg.push_back(c);
                used += a;
            }
            if (seg.size() >= 2) segments.push_back(seg);
        } else {
            segments.push_back(chain);
        }
    }

    Compressed cz;
    if (segments.empty()) {
        cz.graph = g;
        cz.mapping = m;
        cz.timing = tm;
        cz.origin.resize(n);
        for (int i = 0; i < n; ++i) cz.origin[i] = i;
        return cz;
    }

    // absorbed[v]: node vanishes; rep[c]: head compute of c's segment
    std::vector<char> absorbed(n, 0);
    std::vector<int> rep(n, -1);
    for (const auto& seg : segments) {
        for (size_t k = 0; k < seg.size(); ++k) {
            rep[seg[k]] = seg[0];
            if (k > 0) {
                absorbed[seg[k]] = 1;              // non-head computes
                absorbed[pred[seg[k]][0]] = 1;     // their input memories
                absorbed[succ[seg[k - 1]][0]] = 1; // preceding output memories
                rep[pred[seg[k]][0]] = seg[0];
                rep[succ[seg[k - 1]][0]] = seg[0];
            }
        }
    }

    std::vector<int> new_id(n, -1);
    cz.origin.clear();
    for (int i = 0; i < n; ++i) {
        if (absorbed[i]) continue;
        new_id[i] = static_cast<int>(cz.origin.size());
        cz.origin.push_back(i);
    }
    auto target = [&](int old) {
        return new_id[rep[old] >= 0 ? rep[old] : old];
    };

    for (int i = 0; i < n; ++i) {
        if (absorbed[i]) continue;
        Node nd = g.nodes[i];
        nd.id = new_id[i];
        cz.graph.nodes.push_back(nd);
    }
    for (const auto& [u, v] : g.edges) {
        int a = target(u), b = target(v);
        if (a == b) continue; // internal edge of a merged segment
        cz.graph.add_edge(a, b);
    }
    cz.graph.sort_edges();

    // merged task attributes and exec overrides
    cz.timing = tm;
    cz.timing.exec_table.clear();
    cz.timing.transport_table.clear();
    for (const auto& [key, sec] : tm.exec_table) {
        int node = key.first;
        if (absorbed[node] || rep[node] >= 0) continue; // heads overridden below
        cz.timing.exec_table[{new_id[node], key.second}] = sec;
    }
    for (const auto& [key, sec] : tm.transport_table) {
        int node = std::get<0>(key);
        int t = -1;
        if (rep[node] >= 0) {
            // the tail compute produces the merged write; heads/middles drop
            const auto& seg = *std::find_if(
                segments.begin(), segments.end(),
                [&](const auto& s) { return s[0] == rep[node]; });
            if (node != seg.back()) continue;
            t = new_id[seg[0]];
        } else if (!absorbed[node]) {
            t = new_id[node];
        } else {
            continue;
        }
        cz.timing.transport_table[{t, std::get<1>(key), std::get<2>(key)}] = sec;
    }
    for (const auto& seg : segments) {
        int u = unit_of(seg[0]);
        double cost = 0.0;
        double area = 0.0;
        for (int c : seg) {
            double t = view.exec(c, u);
            if (view.dataflow(u)) cost = std::max(cost, t); else cost += t;
            area += g.nodes[c].attrs->area;
        }
        int head = seg[0], tail = seg.back();
        Node& merged = cz.graph.nodes[new_id[head]];
        merged.attrs = g.nodes[head].attrs;
        merged.attrs->area = area;
        double entry = g.nodes[pred[head][0]].data_bytes;
        double exit_bytes = g.nodes[succ[tail][0]].data_bytes;
        merged.attrs->data_ratio = entry > 0.0 ? exit_bytes / entry : 1.0;
        merged.data_bytes = entry;
        cz.timing.exec_table[{new_id[head], view.unit_id(u)}] = cost;
    }
    if (cz.timing.backend == TimingModel::Backend::Estimate) {
        cz.timing.backend = TimingModel::Backend::Mixed;
        cz.timing.mixed_penalty = 1.0;
    }

    for (const auto& [node, unit] : m.at)
        if (!absorbed[node] && rep[node] < 0) cz.mapping.at[new_id[node]] = unit;
    for (const auto& seg : segments)
        cz.mapping.at[new_id[seg[0]]] = m.at.at(seg[0]);

    return cz;
}

EvalResult evaluate(const AppGraph& g, const Platform& pf,
                    const TimingModel& tm, const Mapping& m,
                    const EvalOptions& opt) {
    {
        std::vector<Violation> vs = verify_mapping(g, pf, tm, m);
        if (!vs.empty()) throw error("invalid mapping: " + join_violations(vs));
    }
    {
        std::vector<Violation> vs = validate(g);
        if (!vs.empty()) throw error("invalid graph: " + join_violations(vs));
    }

    if (opt.streaming) {
        Compressed cz = compress_streams(g, m, pf, tm);
        EvalOptions inner = opt;
        inner.streaming = false;
        EvalResult r = evaluate(cz.graph, pf, cz.timing, cz.mapping, inner);
        for (Event& e : r.timeline.events) e.node = cz.origin[e.node];
        std::map<int, double> ready;
        for (const auto& [node, t] : r.timeline.data_ready)
            ready[cz.origin[node]] = t;
        r.timeline.data_ready = std::move(ready);
        return r;
    }

    TimingView view(g, pf, tm);
    std::vector<int> order = topsort_bfs(g, opt.order_seed);
    auto succ = g.successors();

    std::vector<int> unit(g.nodes.size(), -1);
    for (const auto& [node, uid] : m.at) unit[node] = view.unit_index(uid);

    std::vector<double> clock(view.unit_count(), 0.0);
    std::vector<double> ready(g.nodes.size(), 0.0);
    EvalResult res;
    Timeline& tl = res.timeline;

    auto fail_infinite = [&](int a, int b) {
        res.makespan = kInf;
        tl.note = "infinite time on edge " + std::to_string(a) + "->" +
                  std::to_string(b);
    };

    for (int i : order) {
        const Node& nd = g.nodes[i];
        if (nd.kind == NodeKind::InputMem) {
            int j = succ[i][0];
            int k = succ[j][0];
            int pi = unit[i], pj = unit[j], pk = unit[k];
            double d_in = view.transport(i, pi, pj);
            double t = view.exec(j, pj);
            double d_out = view.transport(j, pj, pk);
            if (is_inf(d_in) || is_inf(t) || is_inf(d_out)) {
                if (is_inf(d_out)) fail_infinite(j, k);
                else fail_infinite(i, j);
                break;
            }
            double start = std::max(
                {clock[pi], clock[pj], clock[pk], ready[i]});
            double time = start + d_in + t + d_out;
            clock[pi] = clock[pj] = clock[pk] = time;
            ready[j] = ready[k] = time;
            tl.events.push_back(
                {i, view.unit_id(pi), start, start + d_in, EventKind::Read});
            tl.events.push_back({j, view.unit_id(pj), start + d_in,
                                 start + d_in + t, EventKind::Compute});
            tl.events.push_back(
                {k, view.unit_id(pk), start + d_in + t, time, EventKind::Write});
        } else if (nd.kind == NodeKind::Source || nd.kind == NodeKind::OutputMem) {
            for (int j : succ[i]) {
                int pi = unit[i], pj = unit[j];
                double tau = view.transport(i, pi, pj);
                if (is_inf(tau)) {
                    fail_infinite(i, j);
                    break;
                }
                double start = std::max({clock[pi], clock[pj], ready[i]});
                if (pi == pj) {
                    clock[pi] = start;
                    ready[j] = std::max(ready[j], start);
                    continue;
                }
                if (!opt.bus_overlap || tau == 0.0) {
                    clock[pi] = clock[pj] = start + tau;
                    ready[j] = std::max(ready[j], start + tau);
                    tl.events.push_back({i, view.unit_id(pi), start,
                                         start + tau, EventKind::Transfer});
                    tl.events.push_back({i, view.unit_id(pj), start,
                                         start + tau, EventKind::Transfer});
                } else {
                    double rf = view.rate_of(pi), rt = view.rate_of(pj);
                    double r1 = std::min(rf, rt), r2 = std::max(rf, rt);
                    double short_tau = is_inf(r2) ? 0.0 : tau * (r1 / r2);
                    double tf = rf <= rt ? tau : short_tau; // slower gets tau
                    double tt = rf <= rt ? short_tau : tau;
                    clock[pi] = start + tf;
                    clock[pj] = start + tt;
                    ready[j] = std::max(ready[j], start + tau);
                    tl.events.push_back({i, view.unit_id(pi), start,
                                         start + tf, EventKind::Transfer});
                    tl.events.push_back({i, view.unit_id(pj), start,
                                         start + tt, EventKind::Transfer});
                }
            }
            if (is_inf(res.makespan)) break;
        }
    }

    if (!is_inf(res.makespan)) {
        res.makespan = 0.0;
        for (double c : clock) res.makespan = std::max(res.makespan, c);
    }
    for (int u = 0; u < view.unit_count(); ++u)
        tl.clocks[view.unit_id(u)] = clock[u];
    for (size_t i = 0; i < ready.size(); ++i)
        tl.data_ready[static_cast<int>(i)] = ready[i];
    return res;
}

Mapping uniform_mapping(const AppGraph& g, const std::string& proc,
                        const std::string& mem) {
    Mapping m;
    for (const Node& n : g.nodes)
        m.at[n.id] = n.kind == NodeKind::Compute ? proc : mem;
    return m;
}

Mapping all_cpu_mapping(const AppGraph& g, const Platform& pf) {
    if (pf.procs.empty()) throw error("platform has no proc units");
    const std::string& proc = pf.procs[0].id;
    const auto* mems = pf.assoc_of(proc);
    if (!mems || mems->empty()) throw error("proc " + proc + " has no memory");
    return uniform_mapping(g, proc, mems->front());
}

} // namespace hetmap

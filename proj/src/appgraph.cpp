#include "hetmap/appgraph.hpp"

#include <algorithm>
#include <array>

namespace hetmap {

const char* kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Source: return "source";
        case NodeKind::Sink: return "sink";
        case NodeKind::InputMem: return "input_mem";
        case NodeKind::Compute: return "compute";
        case NodeKind::OutputMem: return "output_mem";
    }
    return "?";
}

NodeKind kind_from_name(const std::string& name) {
    if (name == "source") return NodeKind::Source;
    if (name == "sink") return NodeKind::Sink;
    if (name == "input_mem") return NodeKind::InputMem;
    if (name == "compute") return NodeKind::Compute;
    if (name == "output_mem") return NodeKind::OutputMem;
    throw error("unknown node kind: " + name);
}

int AppGraph::add_node(NodeKind kind, double bytes,
                       std::optional<TaskAttrs> attrs) {
    Node n;
    n.id = static_cast<int>(nodes.size());
    n.kind = kind;
    n.data_bytes = bytes;
    n.attrs = std::move(attrs);
    nodes.push_back(std::move(n));
    return nodes.back().id;
}

void AppGraph::add_edge(int from, int to) { edges.emplace_back(from, to); }

void AppGraph::sort_edges() {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

std::vector<std::vector<int>> AppGraph::successors() const {
    std::vector<std::vector<int>> out(nodes.size());
    for (const auto& [u, v] : edges) out[u].push_back(v);
    return out;
}

std::vector<std::vector<int>> AppGraph::predecessors() const {
    std::vector<std::vector<int>> in(nodes.size());
    for (const auto& [u, v] : edges) in[v].push_back(u);
    return in;
}

namespace {

bool ids_dense(const AppGraph& g) {
    for (size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i].id != static_cast<int>(i)) return false;
    return true;
}

bool edge_endpoints_ok(const AppGraph& g) {
    int n = static_cast<int>(g.nodes.size());
    for (const auto& [u, v] : g.edges)
        if (u < 0 || u >= n || v < 0 || v >= n) return false;
    return true;
}

} // namespace

std::vector<Violation> validate(const AppGraph& g) {
    std::vector<Violation> out;
    auto add = [&](std::string code, std::string msg) {
        out.push_back({std::move(code), std::move(msg)});
    };

    if (!ids_dense(g)) {
        add("ids_not_dense", "node ids must be dense and in positional order");
        return out;
    }
    if (!edge_endpoints_ok(g)) {
        add("bad_edge_endpoint", "edge references a node id out of range");
        return out;
    }
    {
        std::vector<std::pair<int, int>> sorted = g.edges;
        std::sort(sorted.begin(), sorted.end());
        for (size_t i = 0; i + 1 < sorted.size(); ++i)
            if (sorted[i] == sorted[i + 1])
                add("duplicate_edge",
                    "duplicate edge " + std::to_string(sorted[i].first) +
                        "->" + std::to_string(sorted[i].second));
    }
    for (const auto& [u, v] : g.edges)
        if (u == v)
            add("self_loop", "self loop on node " + std::to_string(u));

    // DAG check via Kahn.
    {
        std::vector<int> indeg(g.nodes.size(), 0);
        auto succ = g.successors();
        for (const auto& [u, v] : g.edges) { (void)u; ++indeg[v]; }
        std::vector<int> frontier;
        for (size_t i = 0; i < g.nodes.size(); ++i)
            if (indeg[i] == 0) frontier.push_back(static_cast<int>(i));
        size_t seen = 0;
        while (!frontier.empty()) {
            int u = frontier.back();
            frontier.pop_back();
            ++seen;
            for (int v : succ[u])
                if (--indeg[v] == 0) frontier.push_back(v);
        }
        if (seen != g.nodes.size()) add("not_a_dag", "graph contains a directed cycle");
    }

    auto succ = g.successors();
    auto pred = g.predecessors();

    // Allowed edge shapes.
    for (const auto& [u, v] : g.edges) {
        NodeKind a = g.nodes[u].kind, b = g.nodes[v].kind;
        bool ok = false;
        if ((a == NodeKind::Source || a == NodeKind::OutputMem) &&
            (b == NodeKind::InputMem || b == NodeKind::Sink))
            ok = true;
        if (a == NodeKind::InputMem && b == NodeKind::Compute) ok = true;
        if (a == NodeKind::Compute && b == NodeKind::OutputMem) ok = true;
        if (!ok) {
            std::string msg = "edge " + std::to_string(u) + "->" +
                              std::to_string(v) + " connects " + kind_name(a) +
                              " to " + kind_name(b);
            if (a == NodeKind::Compute && b == NodeKind::Compute)
                msg = "computation nodes must connect via memories: edge " +
                      std::to_string(u) + "->" + std::to_string(v);
            add("bad_edge_kind", msg);
        }
    }

    for (const Node& n : g.nodes) {
        const std::string id = std::to_string(n.id);
        switch (n.kind) {
            case NodeKind::Source:
                if (!pred[n.id].empty())
                    add("source_indegree", "source " + id + " has incoming edges");
                break;
            case NodeKind::Sink:
                if (!succ[n.id].empty())
                    add("sink_outdegree", "sink " + id + " has outgoing edges");
                break;
            case NodeKind::InputMem:
                if (succ[n.id].size() != 1 ||
                    g.nodes[succ[n.id].empty() ? n.id : succ[n.id][0]].kind !=
                        NodeKind::Compute)
                    add("input_mem_shape",
                        "input memory " + id +
                            " must feed exactly one compute node");
                break;
            case NodeKind::Compute: {
                bool in_ok = pred[n.id].size() == 1 &&
                             g.nodes[pred[n.id][0]].kind == NodeKind::InputMem;
                bool out_ok = succ[n.id].size() == 1 &&
                              g.nodes[succ[n.id][0]].kind == NodeKind::OutputMem;
                if (!in_ok)
                    add("compute_in_shape",
                        "compute " + id + " must have exactly one input memory");
                if (!out_ok)
                    add("compute_out_shape",
                        "compute " + id + " must have exactly one output memory");
                break;
            }
            case NodeKind::OutputMem:
                if (pred[n.id].size() != 1 ||
                    g.nodes[pred[n.id].empty() ? n.id : pred[n.id][0]].kind !=
                        NodeKind::Compute)
                    add("output_mem_shape",
                        "output memory " + id +
                            " must be fed by exactly one compute node");
                break;
        }
        if (n.kind == NodeKind::Compute) {
            if (!n.attrs) {
                add("missing_attrs", "compute " + id + " has no task attributes");
            } else {
                const TaskAttrs& a = *n.attrs;
                if (a.parallelizability < 0.0 || a.parallelizability > 1.0)
                    add("bad_parallelizability",
                        "compute " + id + " parallelizability outside [0,1]");
                if (!(a.complexity > 0.0))
                    add("bad_complexity", "compute " + id + " complexity must be > 0");
                if (!(a.data_ratio > 0.0))
                    add("bad_data_ratio", "compute " + id + " data_ratio must be > 0");
                if (a.streamability < 1.0)
                    add("bad_streamability",
                        "compute " + id + " streamability must be >= 1");
                if (a.area < 0.0)
                    add("bad_area", "compute " + id + " area must be >= 0");
            }
        } else if (n.attrs) {
            add("unexpected_attrs",
                "memory-role node " + id + " carries task attributes");
        }
        if (n.data_bytes < 0.0)
            add("bad_bytes", "node " + id + " has negative data_bytes");
    }
    return out;
}

std::vector<int> topsort_bfs(const AppGraph& g, std::optional<uint64_t> seed) {
    std::vector<int> indeg(g.nodes.size(), 0);
    auto succ = g.successors();
    for (const auto& [u, v] : g.edges) { (void)u; ++indeg[v]; }

    std::optional<Rng> rng;
    if (seed) rng.emplace(*seed);

    std::vector<int> layer;
    for (size_t i = 0; i < g.nodes.size(); ++i)
        if (indeg[i] == 0) layer.push_back(static_cast<int>(i));
    std::sort(layer.begin(), layer.end());

    std::vector<int> order;
    order.reserve(g.nodes.size());
    while (!layer.empty()) {
        if (rng) rng->shuffle(layer);
        std::vector<int> next;
        for (int u : layer) {
            order.push_back(u);
            for (int v : succ[u])
                if (--indeg[v] == 0) next.push_back(v);
        }
        std::sort(next.begin(), next.end());
        layer = std::move(next);
    }
    if (order.size() != g.nodes.size()) throw error("not a DAG");
    return order;
}

namespace {

// True when `from` reaches `to` in `edges` without using the edge (from, to).
bool reachable_without_direct(const std::vector<std::pair<int, int>>& edges,
                              int from, int to, int node_count) {
    std::vector<std::vector<int>> succ(node_count);
    for (const auto& [u, v] : edges) {
        if (u == from && v == to) continue;
        succ[u].push_back(v);
    }
    std::vector<char> seen(node_count, 0);
    std::vector<int> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : succ[u]) {
            if (v == to) return true;
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
        }
    }
    return false;
}

} // namespace

AppGraph gen_series_parallel(int target_edges, uint64_t seed) {
    if (target_edges < 1) throw error("target_edges must be >= 1");
    Rng rng(seed);

    int node_count = 2; // 0 = source, 1 = sink
    std::vector<std::pair<int, int>> cur{{0, 1}};
    int series_ops = 0;
    const double m = static_cast<double>(target_edges);

    while (static_cast<int>(cur.size()) < target_edges) {
        double p_series = 0.5 + 0.5 * static_cast<double>(series_ops) / m;
        bool series = rng.uniform01() < p_series;
        size_t idx = static_cast<size_t>(rng.below(cur.size()));
        auto [u, v] = cur[idx];
        if (series) {
            int w = node_count++;
            cur[idx] = {u, w};
            cur.emplace_back(w, v);
            ++series_ops;
        } else {
            cur.emplace_back(u, v);
        }
    }

    // Dedup: collapse parallel bundles, then drop any direct edge that has an
    // alternative path between its endpoints (a parallel bundle whose copies
    // were later subdivided leaves such shortcuts behind).
    std::sort(cur.begin(), cur.end());
    cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
    std::vector<std::pair<int, int>> kept = cur;
    for (const auto& e : cur) {
        auto it = std::find(kept.begin(), kept.end(), e);
        if (it == kept.end()) continue;
        if (reachable_without_direct(kept, e.first, e.second, node_count))
            kept.erase(it);
    }

    AppGraph g;
    g.add_node(NodeKind::Source);
    g.add_node(NodeKind::Sink);
    for (int i = 2; i < node_count; ++i) g.add_node(NodeKind::Compute);
    g.edges = std::move(kept);
    g.sort_edges();
    return g;
}

AttrsSampler default_sampler(Rng& rng) {
    return [&rng]() {
        TaskAttrs a;
        a.parallelizability = rng.uniform01();
        a.complexity = rng.lognormal(3.0, 0.5);
        a.data_ratio = 1.0;
        a.streamability = std::max(1.0, a.complexity);
        a.area = a.complexity;
        return a;
    };
}

AttrsSampler constant_complexity_sampler(Rng& rng, double c) {
    return [&rng, c]() {
        TaskAttrs a;
        a.parallelizability = rng.uniform01();
        a.complexity = c;
        a.data_ratio = 1.0;
        a.streamability = std::max(1.0, c);
        a.area = c;
        return a;
    };
}

AppGraph expand_tasks(const AppGraph& skeleton, const AttrsSampler& sampler,
                      double source_bytes) {
    // The skeleton must be a plain DAG; run the subset of checks that apply.
    {
        AppGraph copy = skeleton;
        std::vector<Violation> v = validate(copy);
        for (const Violation& viol : v) {
            if (viol.code == "not_a_dag" || viol.code == "duplicate_edge" ||
                viol.code == "self_loop" || viol.code == "ids_not_dense" ||
                viol.code == "bad_edge_endpoint")
                throw error("invalid skeleton: " + viol.message);
        }
    }

    auto succ = skeleton.successors();
    auto pred = skeleton.predecessors();

    AppGraph g;
    // skeleton node id -> (input, compute, output) or single memory node
    std::vector<std::array<int, 3>> triple(skeleton.nodes.size(), {-1, -1, -1});
    std::vector<int> plain(skeleton.nodes.size(), -1);

    for (const Node& n : skeleton.nodes) {
        bool is_source = pred[n.id].empty();
        bool is_sink = succ[n.id].empty();
        if (is_source && is_sink)
            throw error("invalid skeleton: isolated node " + std::to_string(n.id));
        if (is_source) {
            plain[n.id] = g.add_node(NodeKind::Source, source_bytes);
        } else if (is_sink) {
            plain[n.id] = g.add_node(NodeKind::Sink);
        } else {
            int in = g.add_node(NodeKind::InputMem);
            int comp = g.add_node(NodeKind::Compute, 0.0, sampler());
            int out = g.add_node(NodeKind::OutputMem);
            triple[n.id] = {in, comp, out};
            g.add_edge(in, comp);
            g.add_edge(comp, out);
        }
    }
    for (const auto& [u, v] : skeleton.edges) {
        int from = plain[u] >= 0 ? plain[u] : triple[u][2];
        int to = plain[v] >= 0 ? plain[v] : triple[v][0];
        g.add_edge(from, to);
    }
    g.sort_edges();
    propagate_bytes(g);
    return g;
}

void propagate_bytes(AppGraph& g) {
    auto pred = g.predecessors();
    for (int id : topsort_bfs(g)) {
        Node& n = g.nodes[id];
        switch (n.kind) {
            case NodeKind::Source:
                break; // authored
            case NodeKind::InputMem:
            case NodeKind::Sink: {
                double sum = 0.0;
                for (int p : pred[id]) sum += g.nodes[p].data_bytes;
                n.data_bytes = sum;
                break;
            }
            case NodeKind::Compute:
                n.data_bytes = pred[id].empty() ? 0.0
                                                : g.nodes[pred[id][0]].data_bytes;
                break;
            case NodeKind::OutputMem: {
                double in = pred[id].empty() ? 0.0 : g.nodes[pred[id][0]].data_bytes;
                double ratio = 1.0;
                if (!pred[id].empty() && g.nodes[pred[id][0]].attrs)
                    ratio = g.nodes[pred[id][0]].attrs->data_ratio;
                n.data_bytes = ratio * in;
                break;
            }
        }
    }
}

void set_uniform_load(AppGraph& g, double bytes) {
    auto pred = g.predecessors();
    for (Node& n : g.nodes) {
        switch (n.kind) {
            case NodeKind::Source:
            case NodeKind::InputMem:
            case NodeKind::Compute:
                n.data_bytes = bytes;
                break;
            case NodeKind::OutputMem:
                n.data_bytes = bytes * (g.nodes[pred[n.id][0]].attrs
                                            ? g.nodes[pred[n.id][0]].attrs->data_ratio
                                            : 1.0);
                break;
            case NodeKind::Sink:
                break; // fixed below
        }
    }
    for (Node& n : g.nodes) {
        if (n.kind != NodeKind::Sink) continue;
        double sum = 0.0;
        for (int p : pred[n.id]) sum += g.nodes[p].data_bytes;
        n.data_bytes = sum;
    }
}

} // namespace hetmap

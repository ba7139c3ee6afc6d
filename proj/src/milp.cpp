#include "hetmap/milp.hpp"

#include <algorithm>

#include "hetmap/solver.hpp"

namespace hetmap {

int MilpModel::add_binary(const std::string& name) {
    MilpVar v;
    v.id = static_cast<int>(vars.size());
    v.kind = MilpVar::Kind::Binary;
    v.lo = 0.0;
    v.hi = 1.0;
    v.name = name;
    vars.push_back(std::move(v));
    return vars.back().id;
}

int MilpModel::add_continuous(const std::string& name, double lo, double hi) {
    MilpVar v;
    v.id = static_cast<int>(vars.size());
    v.kind = MilpVar::Kind::Continuous;
    v.lo = lo;
    v.hi = hi;
    v.name = name;
    vars.push_back(std::move(v));
    return vars.back().id;
}

int MilpModel::add_con(std::vector<std::pair<int, double>> terms,
                       MilpConstraint::Sense sense, double rhs,
                       const std::string& name) {
    MilpConstraint c;
    c.terms = std::move(terms);
    c.sense = sense;
    c.rhs = rhs;
    c.name = name;
    cons.push_back(std::move(c));
    return static_cast<int>(cons.size()) - 1;
}

int MilpModel::var_by_name(const std::string& name) const {
    for (const MilpVar& v : vars)
        if (v.name == name) return v.id;
    return -1;
}

double MilpModel::objective_value(const std::vector<double>& values) const {
    double obj = 0.0;
    for (const auto& [var, coeff] : objective) obj += coeff * values[var];
    return obj;
}

std::optional<std::string> MilpModel::check_point(
    const std::vector<double>& values, double tol) const {
    if (values.size() < vars.size()) return "missing variable values";
    for (const MilpVar& v : vars) {
        double x = values[v.id];
        if (x < v.lo - tol || x > v.hi + tol) return "bounds of " + v.name;
    }
    for (const MilpConstraint& c : cons) {
        double lhs = 0.0;
        for (const auto& [var, coeff] : c.terms) lhs += coeff * values[var];
        bool ok = true;
        switch (c.sense) {
            case MilpConstraint::Sense::LE: ok = lhs <= c.rhs + tol; break;
            case MilpConstraint::Sense::EQ: ok = std::abs(lhs - c.rhs) <= tol; break;
            case MilpConstraint::Sense::GE: ok = lhs >= c.rhs - tol; break;
        }
        if (!ok) return c.name;
    }
    return std::nullopt;
}

int mccormick(MilpModel& model, int a, int b) {
    if (a < 0 || b < 0 || a >= static_cast<int>(model.vars.size()) ||
        b >= static_cast<int>(model.vars.size()))
        throw error("mccormick: unknown variable");
    if (model.vars[a].kind != MilpVar::Kind::Binary ||
        model.vars[b].kind != MilpVar::Kind::Binary)
        throw error("mccormick: inputs must be binary");
    std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    auto it = model.mccormick_memo.find(key);
    if (it != model.mccormick_memo.end()) return it->second;

    auto part = [&](int v) {
        const std::string& n = model.vars[v].name;
        return n.rfind("x_", 0) == 0 ? n.substr(2) : n;
    };
    std::string name = "w_" + part(a) + "_" + part(b);
    int w = model.add_continuous(name, 0.0, 1.0);
    model.add_con({{w, 1.0}, {a, -1.0}}, MilpConstraint::Sense::LE, 0.0,
                  "mc1_" + name);
    model.add_con({{w, 1.0}, {b, -1.0}}, MilpConstraint::Sense::LE, 0.0,
                  "mc2_" + name);
    model.add_con({{w, 1.0}, {a, -1.0}, {b, -1.0}}, MilpConstraint::Sense::GE,
                  -1.0, "mc3_" + name);
    model.mccormick_memo[key] = w;
    return w;
}

namespace {

// Shared assignment/capacity scaffolding; fills maps.x and maps.units.
void add_assignment(MilpModel& model, BuildMaps& maps, const AppGraph& g,
                    const TimingView& view) {
    for (int u = 0; u < view.unit_count(); ++u)
        maps.units.push_back(view.unit_id(u));
    for (const Node& n : g.nodes) {
        std::vector<int> cand = view.candidates(n.id);
        if (cand.empty())
            throw error("node " + std::to_string(n.id) +
                        " has no compatible unit (infeasible)");
        std::vector<std::pair<int, double>> row;
        for (int u : cand) {
            int v = model.add_binary("x_" + std::to_string(n.id) + "_" +
                                     view.unit_id(u));
            maps.x[{n.id, u}] = v;
            row.emplace_back(v, 1.0);
        }
        model.add_con(std::move(row), MilpConstraint::Sense::EQ, 1.0,
                      "assign_" + std::to_string(n.id));
    }
}

void add_capacity(MilpModel& model, const BuildMaps& maps, const AppGraph& g,
                  const TimingView& view) {
    for (int u = 0; u < view.unit_count(); ++u) {
        if (!view.dataflow(u)) continue;
        std::vector<std::pair<int, double>> row;
        for (const Node& n : g.nodes) {
            if (n.kind != NodeKind::Compute || !n.attrs) continue;
            auto it = maps.x.find({n.id, u});
            if (it != maps.x.end()) row.emplace_back(it->second, n.attrs->area);
        }
        if (!row.empty())
            model.add_con(std::move(row), MilpConstraint::Sense::LE,
                          view.capacity(u), "cap_" + view.unit_id(u));
    }
}

void forbid_pair(MilpModel& model, const BuildMaps& maps, int i, int p, int j,
                 int q) {
    model.add_con({{maps.x.at({i, p}), 1.0}, {maps.x.at({j, q}), 1.0}},
                  MilpConstraint::Sense::LE, 1.0,
                  "forbid_" + std::to_string(i) + "_" + maps.units[p] + "_" +
                      std::to_string(j) + "_" + maps.units[q]);
}

std::vector<std::vector<char>> reachability(const AppGraph& g) {
    int n = static_cast<int>(g.nodes.size());
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    std::vector<int> order = topsort_bfs(g);
    auto succ = g.successors();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int u = *it;
        for (int v : succ[u]) {
            reach[u][v] = 1;
            for (int t = 0; t < n; ++t)
                if (reach[v][t]) reach[u][t] = 1;
        }
    }
    return reach;
}

} // namespace

std::pair<MilpModel, BuildMaps> build_device_based(const AppGraph& g,
                                                   const Platform& pf,
                                                   const TimingModel& tm) {
    TimingView view(g, pf, tm);
    MilpModel model;
    model.form = MilpModel::Form::Device;
    BuildMaps maps;
    maps.form = model.form;

    add_assignment(model, maps, g, view);
    maps.z = model.add_continuous("z", 0.0, kInf);
    model.objective = {{maps.z, 1.0}};

    // busy(p) = exec on p + transports leaving p + transports entering p
    std::vector<std::vector<std::pair<int, double>>> busy(view.unit_count());
    for (const Node& n : g.nodes)
        for (int u : view.candidates(n.id)) {
            double t = view.exec(n.id, u);
            if (t > 0.0) busy[u].emplace_back(maps.x.at({n.id, u}), t);
        }
    for (const auto& [i, j] : g.edges) {
        for (int p : view.candidates(i)) {
            for (int q : view.candidates(j)) {
                double d = view.transport(i, p, q);
                if (d == 0.0) continue;
                if (is_inf(d)) {
                    forbid_pair(model, maps, i, p, j, q);
                    continue;
                }
                int w = mccormick(model, maps.x.at({i, p}), maps.x.at({j, q}));
                maps.w[{i, p, j, q}] = w;
                busy[p].emplace_back(w, d);
                busy[q].emplace_back(w, d);
            }
        }
    }
    for (int u = 0; u < view.unit_count(); ++u) {
        std::vector<std::pair<int, double>> row{{maps.z, 1.0}};
        std::map<int, double> acc;
        for (const auto& [var, coeff] : busy[u]) acc[var] += coeff;
        for (const auto& [var, coeff] : acc) row.emplace_back(var, -coeff);
        model.add_con(std::move(row), MilpConstraint::Sense::GE, 0.0,
                      "busy_" + view.unit_id(u));
    }
    add_capacity(model, maps, g, view);
    return {std::move(model), std::move(maps)};
}

std::pair<MilpModel, BuildMaps> build_time_based(const AppGraph& g,
                                                 const Platform& pf,
                                                 const TimingModel& tm,
                                                 const std::vector<int>& order,
                                                 const TimeOptions& options) {
    int n = static_cast<int>(g.nodes.size());
    {
        if (static_cast<int>(order.size()) != n)
            throw error("order not topological: wrong length");
        std::vector<int> pos(n, -1);
        for (int idx = 0; idx < n; ++idx) {
            int node = order[idx];
            if (node < 0 || node >= n || pos[node] >= 0)
                throw error("order not topological: not a permutation");
            pos[node] = idx;
        }
        for (const auto& [u, v] : g.edges)
            if (pos[u] >= pos[v])
                throw error("order not topological: edge " + std::to_string(u) +
                            "->" + std::to_string(v) + " inverted");
    }

    TimingView view(g, pf, tm);
    MilpModel model;
    model.form = MilpModel::Form::Time;
    BuildMaps maps;
    maps.form = model.form;
    maps.order = order;
    maps.options = options;

    add_assignment(model, maps, g, view);
    maps.z = model.add_continuous("z", 0.0, kInf);
    model.objective = {{maps.z, 1.0}};
    for (const Node& nd : g.nodes) {
        maps.y[{nd.id, 0}] =
            model.add_continuous("y_" + std::to_string(nd.id) + "_0", 0.0, kInf);
        maps.y[{nd.id, 1}] =
            model.add_continuous("y_" + std::to_string(nd.id) + "_1", 0.0, kInf);
    }

    for (const Node& nd : g.nodes) {
        int i = nd.id;
        model.add_con({{maps.z, 1.0}, {maps.y.at({i, 1}), -1.0}},
                      MilpConstraint::Sense::GE, 0.0,
                      "end_" + std::to_string(i));
        std::vector<std::pair<int, double>> dur{{maps.y.at({i, 1}), 1.0},
                                                {maps.y.at({i, 0}), -1.0}};
        for (int u : view.candidates(i)) {
            double t = view.exec(i, u);
            if (t > 0.0) dur.emplace_back(maps.x.at({i, u}), -t);
        }
        model.add_con(std::move(dur), MilpConstraint::Sense::GE, 0.0,
                      "dur_" + std::to_string(i));
    }

    for (const auto& [i, j] : g.edges) {
        std::vector<std::pair<int, double>> row{{maps.y.at({j, 0}), 1.0},
                                                {maps.y.at({i, 1}), -1.0}};
        for (int p : view.candidates(i)) {
            for (int q : view.candidates(j)) {
                double d = view.transport(i, p, q);
                if (d == 0.0) continue;
                if (is_inf(d)) {
                    forbid_pair(model, maps, i, p, j, q);
                    continue;
                }
                int w = mccormick(model, maps.x.at({i, p}), maps.x.at({j, q}));
                maps.w[{i, p, j, q}] = w;
                row.emplace_back(w, -d);
            }
        }
        maps.edge_row[{i, j}] = model.add_con(
            std::move(row), MilpConstraint::Sense::GE, 0.0,
            "prec_" + std::to_string(i) + "_" + std::to_string(j));
    }

    double M = big_M(g, pf, tm);
    std::vector<std::vector<char>> reach;
    if (options.pairs == TimeOptions::Pairs::PathPruned) reach = reachability(g);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            int i = order[a], j = order[b];
            if (options.pairs == TimeOptions::Pairs::PathPruned && reach[i][j])
                continue;
            for (int p = 0; p < view.unit_count(); ++p) {
                if (options.scope == TimeOptions::OrderingScope::ProcOnly &&
                    !view.is_proc(p))
                    continue;
                auto xi = maps.x.find({i, p});
                auto xj = maps.x.find({j, p});
                if (xi == maps.x.end() || xj == maps.x.end()) continue;
                int w = mccormick(model, xi->second, xj->second);
                maps.w[{i, p, j, p}] = w;
                int row = model.add_con(
                    {{maps.y.at({j, 0}), 1.0}, {maps.y.at({i, 1}), -1.0},
                     {w, -M}},
                    MilpConstraint::Sense::GE, -M,
                    "ord_" + std::to_string(i) + "_" + std::to_string(j) + "_" +
                        view.unit_id(p));
                maps.ordering_rows.push_back({row, i, j, p});
            }
        }
    }
    add_capacity(model, maps, g, view);
    return {std::move(model), std::move(maps)};
}

std::vector<std::vector<int>> dataflow_clusters(const TimingView& view) {
    std::vector<std::vector<int>> clusters;
    const Platform& pf = view.platform();
    for (int u = 0; u < view.unit_count(); ++u) {
        if (!view.dataflow(u)) continue;
        std::vector<int> cl{u};
        if (const auto* mems = pf.assoc_of(view.unit_id(u)))
            for (const std::string& m : *mems) {
                int idx = view.unit_index(m);
                if (idx >= 0) cl.push_back(idx);
            }
        clusters.push_back(std::move(cl));
    }
    return clusters;
}

double streaming_credit(const AppGraph& g, const TimingView& view, int i,
                        int j, int u) {
    const Node& nd = g.nodes[i];
    int owner = -1;
    switch (nd.kind) {
        case NodeKind::Compute:
            owner = i;
            break;
        case NodeKind::OutputMem: {
            auto pred = g.predecessors();
            owner = pred[i].empty() ? -1 : pred[i][0];
            break;
        }
        case NodeKind::InputMem:
            owner = g.nodes[j].kind == NodeKind::Compute ? j : -1;
            break;
        default:
            return 0.0;
    }
    if (owner < 0 || !view.compatible(owner, u)) return 0.0;
    double t = view.exec(owner, u);
    return is_inf(t) ? 0.0 : t;
}

void add_streaming_extension(MilpModel& model, BuildMaps& maps,
                             const AppGraph& g, const Platform& pf,
                             const TimingModel& tm) {
    if (maps.form != MilpModel::Form::Time ||
        model.form != MilpModel::Form::Time)
        throw error("streaming extension requires a time-based model");
    TimingView view(g, pf, tm);
    std::vector<std::vector<int>> clusters = dataflow_clusters(view);
    auto cluster_of = [&](int p, int q) -> int {
        for (size_t c = 0; c < clusters.size(); ++c) {
            const auto& cl = clusters[c];
            bool hp = std::find(cl.begin(), cl.end(), p) != cl.end();
            bool hq = std::find(cl.begin(), cl.end(), q) != cl.end();
            if (hp && hq) return clusters[c][0]; // the dataflow proc
        }
        return -1;
    };

    // rewrite each edge precedence row
    for (const auto& [edge, row] : maps.edge_row) {
        auto [i, j] = edge;
        std::vector<std::pair<int, double>> terms{{maps.y.at({j, 0}), 1.0},
                                                  {maps.y.at({i, 1}), -1.0}};
        for (int p : view.candidates(i)) {
            for (int q : view.candidates(j)) {
                int u = cluster_of(p, q);
                if (u < 0) {
                    double d = view.transport(i, p, q);
                    if (d == 0.0 || is_inf(d)) continue; // forbid rows persist
                    int w = mccormick(model, maps.x.at({i, p}),
                                      maps.x.at({j, q}));
                    maps.w[{i, p, j, q}] = w;
                    terms.emplace_back(w, -d);
                } else {
                    double credit = streaming_credit(g, view, i, j, u);
                    if (credit <= 0.0) continue;
                    int w = mccormick(model, maps.x.at({i, p}),
                                      maps.x.at({j, q}));
                    maps.w[{i, p, j, q}] = w;
                    terms.emplace_back(w, credit);
                }
            }
        }
        model.cons[row].terms = std::move(terms);
        model.cons[row].sense = MilpConstraint::Sense::GE;
        model.cons[row].rhs = 0.0;
    }

    for (const auto& [i, j] : g.edges)
        model.add_con({{maps.y.at({j, 1}), 1.0}, {maps.y.at({i, 1}), -1.0}},
                      MilpConstraint::Sense::GE, 0.0,
                      "pend_" + std::to_string(i) + "_" + std::to_string(j));

    // drop same-unit disjunctions on dataflow procs
    std::vector<char> remove(model.cons.size(), 0);
    for (const auto& [row, i, j, p] : maps.ordering_rows) {
        (void)i;
        (void)j;
        if (view.dataflow(p)) remove[row] = 1;
    }
    if (std::find(remove.begin(), remove.end(), 1) != remove.end()) {
        std::vector<int> new_idx(model.cons.size(), -1);
        std::vector<MilpConstraint> kept;
        for (size_t r = 0; r < model.cons.size(); ++r) {
            if (remove[r]) continue;
            new_idx[r] = static_cast<int>(kept.size());
            kept.push_back(std::move(model.cons[r]));
        }
        model.cons = std::move(kept);
        for (auto& [edge, row] : maps.edge_row) {
            (void)edge;
            row = new_idx[row];
        }
        std::vector<std::array<int, 4>> rows;
        for (const auto& [row, i, j, p] : maps.ordering_rows)
            if (new_idx[row] >= 0) rows.push_back({new_idx[row], i, j, p});
        maps.ordering_rows = std::move(rows);
    }
    maps.streaming = true;
}

double big_M(const AppGraph& g, const Platform& pf, const TimingModel& tm) {
    TimingView view(g, pf, tm);
    double M = 0.0;
    for (const Node& n : g.nodes) {
        std::vector<int> cand = view.candidates(n.id);
        if (cand.empty()) continue;
        double worst = 0.0;
        for (int u : cand) {
            double t = view.exec(n.id, u);
            if (is_inf(t))
                throw error("big_M: infinite exec time for node " +
                            std::to_string(n.id));
            worst = std::max(worst, t);
        }
        M += worst;
    }
    for (const auto& [i, j] : g.edges) {
        double worst = -1.0;
        for (int p : view.candidates(i))
            for (int q : view.candidates(j)) {
                double d = view.transport(i, p, q);
                if (!is_inf(d)) worst = std::max(worst, d);
            }
        if (worst < 0.0)
            throw error("big_M: no finite transport on edge " +
                        std::to_string(i) + "->" + std::to_string(j));
        M += worst;
    }
    return M;
}

Mapping extract_mapping(const Solution& sol, const BuildMaps& maps) {
    constexpr double tol = 1e-6;
    Mapping m;
    std::map<int, std::vector<std::pair<int, int>>> per_node; // node -> (unit, var)
    for (const auto& [key, var] : maps.x)
        per_node[key.first].emplace_back(key.second, var);
    for (const auto& [node, cands] : per_node) {
        int chosen = -1;
        double sum = 0.0;
        for (const auto& [unit, var] : cands) {
            double v = var < static_cast<int>(sol.values.size())
                           ? sol.values[var]
                           : 0.0;
            sum += v;
            if (std::abs(v - 1.0) <= tol) {
                if (chosen >= 0)
                    throw error("fractional assignment: node " +
                                std::to_string(node) + " multiply assigned");
                chosen = unit;
            } else if (std::abs(v) > tol) {
                throw error("fractional assignment: node " +
                            std::to_string(node));
            }
        }
        if (chosen < 0 || std::abs(sum - 1.0) > tol)
            throw error("fractional assignment: node " + std::to_string(node));
        m.at[node] = maps.units[chosen];
    }
    return m;
}

double device_objective(const TimingView& view,
                        const std::vector<int>& unit_of) {
    const AppGraph& g = view.graph();
    std::vector<double> busy(view.unit_count(), 0.0);
    for (const Node& n : g.nodes) {
        double t = view.exec(n.id, unit_of[n.id]);
        if (is_inf(t)) return kInf;
        busy[unit_of[n.id]] += t;
    }
    for (const auto& [i, j] : g.edges) {
        int p = unit_of[i], q = unit_of[j];
        if (p == q) continue;
        double d = view.transport(i, p, q);
        if (is_inf(d)) return kInf;
        busy[p] += d;
        busy[q] += d;
    }
    double z = 0.0;
    for (double b : busy) z = std::max(z, b);
    return z;
}

} // namespace hetmap

#include "hetmap/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "hetmap/simplex.hpp"

namespace hetmap {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

} // namespace

const char* status_name(Solution::Status s) {
    switch (s) {
        case Solution::Status::Optimal: return "optimal";
        case Solution::Status::Feasible: return "feasible";
        case Solution::Status::Infeasible: return "infeasible";
        case Solution::Status::Unbounded: return "unbounded";
        case Solution::Status::TimeLimit: return "time_limit";
    }
    return "unknown";
}

Formulation formulation_from_name(const std::string& name) {
    if (name == "device") return Formulation::Device;
    if (name == "time") return Formulation::Time;
    if (name == "time-streaming") return Formulation::TimeStreaming;
    throw error("unknown formulation: " + name);
}

const char* formulation_name(Formulation f) {
    switch (f) {
        case Formulation::Device: return "device";
        case Formulation::Time: return "time";
        case Formulation::TimeStreaming: return "time-streaming";
    }
    return "unknown";
}

double schedule_from_assignment(const AppGraph& g, const TimingView& view,
                                const std::vector<int>& unit_of,
                                const std::vector<int>& order, bool streaming,
                                std::vector<double>* y) {
    int n = static_cast<int>(g.nodes.size());
    std::vector<double> start(n, 0.0), end(n, 0.0);
    std::vector<double> clock(view.unit_count(), 0.0);
    auto preds = g.predecessors();

    std::vector<std::vector<int>> clusters;
    if (streaming) clusters = dataflow_clusters(view);
    auto cluster_of = [&](int p, int q) -> int {
        for (const auto& cl : clusters) {
            bool hp = std::find(cl.begin(), cl.end(), p) != cl.end();
            bool hq = std::find(cl.begin(), cl.end(), q) != cl.end();
            if (hp && hq) return cl[0];
        }
        return -1;
    };

    double z = 0.0;
    for (int i : order) {
        int u = unit_of[i];
        double t = view.exec(i, u);
        if (is_inf(t)) return kInf;
        double s = 0.0;
        double pend = 0.0; // latest parent end (streaming keeps children open)
        for (int p : preds[i]) {
            double ready;
            int owner = streaming ? cluster_of(unit_of[p], u) : -1;
            if (owner >= 0) {
                double credit = streaming_credit(g, view, p, i, owner);
                ready = end[p] - std::max(0.0, credit);
            } else {
                double d = view.transport(p, unit_of[p], u);
                if (is_inf(d)) return kInf;
                ready = end[p] + d;
            }
            s = std::max(s, ready);
            pend = std::max(pend, end[p]);
        }
        bool serialized = !(streaming && view.is_proc(u) && view.dataflow(u));
        if (serialized) s = std::max(s, clock[u]);
        double e = s + t;
        if (streaming) e = std::max(e, pend);
        start[i] = s;
        end[i] = e;
        clock[u] = std::max(clock[u], e);
        z = std::max(z, e);
    }
    if (y) {
        y->assign(2 * static_cast<size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            (*y)[2 * static_cast<size_t>(i)] = start[i];
            (*y)[2 * static_cast<size_t>(i) + 1] = end[i];
        }
    }
    return z;
}

std::pair<Solution, Mapping> solve_exhaustive(const AppGraph& g,
                                              const Platform& pf,
                                              const TimingModel& tm,
                                              Formulation form,
                                              const SolverOptions& opt,
                                              std::optional<uint64_t> order_seed) {
    auto t0 = std::chrono::steady_clock::now();
    TimingView view(g, pf, tm);
    int n = static_cast<int>(g.nodes.size());

    Solution sol;
    std::vector<std::vector<int>> cand(n);
    double space = n > 0 ? 1.0 : 0.0;
    for (int i = 0; i < n; ++i) {
        cand[i] = view.candidates(i);
        if (cand[i].empty()) {
            sol.note = "node " + std::to_string(i) + " has no compatible unit";
            sol.wall_time = seconds_since(t0);
            return {sol, Mapping{}};
        }
        space *= static_cast<double>(cand[i].size());
    }
    if (space > static_cast<double>(opt.enum_budget))
        throw error("assignment space (" + std::to_string(space) +
                    ") exceeds the enumeration budget (" +
                    std::to_string(opt.enum_budget) +
                    "); use branch and bound or an external solver");

    std::vector<int> order = topsort_bfs(g, order_seed);
    bool need_schedule = form != Formulation::Device;
    bool streaming = form == Formulation::TimeStreaming;

    std::vector<int> idx(n, 0), unit_of(n, 0), best_assign;
    double best = kInf;
    long explored = 0;
    bool done = n == 0;
    while (!done) {
        for (int i = 0; i < n; ++i) unit_of[i] = cand[i][idx[i]];
        ++explored;

        bool feasible = true;
        for (int u = 0; u < view.unit_count() && feasible; ++u) {
            if (!view.dataflow(u)) continue;
            double area = 0.0;
            for (const Node& nd : g.nodes)
                if (nd.kind == NodeKind::Compute && unit_of[nd.id] == u)
                    area += nd.attrs->area;
            if (area > view.capacity(u) + 1e-9) feasible = false;
        }
        if (feasible) {
            double obj = need_schedule
                             ? schedule_from_assignment(g, view, unit_of,
                                                        order, streaming)
                             : device_objective(view, unit_of);
            if (obj < best - 1e-12) {
                best = obj;
                best_assign = unit_of;
            }
        }

        int pos = n - 1;
        while (pos >= 0) {
            if (++idx[pos] < static_cast<int>(cand[pos].size())) break;
            idx[pos] = 0;
            --pos;
        }
        if (pos < 0) done = true;
    }

    sol.nodes_explored = explored;
    sol.wall_time = seconds_since(t0);
    Mapping m;
    if (best < kInf) {
        sol.status = Solution::Status::Optimal;
        sol.objective = best;
        sol.best_bound = best;
        for (int i = 0; i < n; ++i) m.at[i] = view.unit_id(best_assign[i]);
    } else {
        sol.note = "no finite-makespan assignment";
    }
    return {sol, m};
}

namespace {

struct Fix {
    int var;
    double value;
};

struct Frame {
    std::vector<Fix> fixes;
    double bound = -kInf; // parent LP objective
    long seq = 0;         // insertion order for deterministic tie-breaks
};

// Round the relaxation to a unit per node, repair dataflow capacity, score it
// with the formulation's own semantics, and lift it back to a model point.
void try_rounding(const MilpModel& model, const BuildMaps& maps,
                  const AppGraph& g, const TimingView& view,
                  const std::vector<double>& vals, double& best,
                  std::vector<double>& best_vals) {
    int n = static_cast<int>(g.nodes.size());
    std::vector<int> unit_of(n, -1);
    std::vector<double> xval(n, -1.0);
    for (const auto& [key, var] : maps.x) {
        auto [node, unit] = key;
        double v = vals[var];
        if (v > xval[node]) {
            xval[node] = v;
            unit_of[node] = unit;
        }
    }
    for (int i = 0; i < n; ++i)
        if (unit_of[i] < 0) return;

    // capacity repair: move the least-committed computes off full units
    for (int u = 0; u < view.unit_count(); ++u) {
        if (!view.dataflow(u)) continue;
        double cap = view.capacity(u);
        auto area_on = [&]() {
            double a = 0.0;
            for (const Node& nd : g.nodes)
                if (nd.kind == NodeKind::Compute && unit_of[nd.id] == u)
                    a += nd.attrs->area;
            return a;
        };
        double area = area_on();
        while (area > cap + 1e-9) {
            int worst = -1;
            for (const Node& nd : g.nodes)
                if (nd.kind == NodeKind::Compute && unit_of[nd.id] == u &&
                    (worst < 0 || xval[nd.id] < xval[worst]))
                    worst = nd.id;
            if (worst < 0) return;
            int alt = -1;
            double alt_x = -1.0;
            for (const auto& [key, var] : maps.x) {
                if (key.first != worst || key.second == u) continue;
                if (view.dataflow(key.second)) continue; // keep repair simple
                if (vals[var] > alt_x) {
                    alt_x = vals[var];
                    alt = key.second;
                }
            }
            if (alt < 0) return;
            unit_of[worst] = alt;
            xval[worst] = alt_x;
            area = area_on();
        }
    }

    double score;
    std::vector<double> yv;
    if (maps.form == MilpModel::Form::Device) {
        score = device_objective(view, unit_of);
    } else {
        score = schedule_from_assignment(g, view, unit_of, maps.order,
                                         maps.streaming, &yv);
    }
    if (is_inf(score) || score >= best - 1e-12) return;

    std::vector<double> point(model.vars.size(), 0.0);
    for (const auto& [key, var] : maps.x)
        point[var] = unit_of[key.first] == key.second ? 1.0 : 0.0;
    for (const auto& [key, var] : maps.w)
        point[var] =
            unit_of[key[0]] == key[1] && unit_of[key[2]] == key[3] ? 1.0 : 0.0;
    if (maps.z >= 0) point[maps.z] = score;
    for (const auto& [key, var] : maps.y)
        point[var] = yv[2 * static_cast<size_t>(key.first) + key.second];

    if (model.check_point(point, 1e-5)) return; // semantic drift guard
    best = score;
    best_vals = std::move(point);
}

} // namespace

Solution solve_bnb(const MilpModel& model, const SolverOptions& opt,
                   const BnbContext& ctx) {
    auto t0 = std::chrono::steady_clock::now();
    Solution out;

    std::vector<int> bins;
    for (const MilpVar& v : model.vars)
        if (v.kind == MilpVar::Kind::Binary) bins.push_back(v.id);

    bool have_ctx = ctx.graph && ctx.platform && ctx.timing && ctx.maps;
    std::optional<TimingView> view;
    if (have_ctx) view.emplace(*ctx.graph, *ctx.platform, *ctx.timing);

    Simplex spx(model);
    double best = kInf;
    std::vector<double> best_vals;
    long nodes = 0;
    long seq = 0;
    bool stopped = false;
    bool cut_exhausted = false;
    double proven_lb = -kInf;

    // best-first: lowest relaxation bound first, insertion order on ties
    // (children of one node tie, and the branch value nearest the relaxation
    // gets the smaller sequence number)
    auto later = [](const Frame& a, const Frame& b) {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.seq > b.seq;
    };
    std::priority_queue<Frame, std::vector<Frame>, decltype(later)> open(later);
    open.push(Frame{{}, -kInf, seq++});
    while (!open.empty()) {
        double cut = best < kInf
                         ? best - opt.gap * std::max(1.0, std::abs(best))
                         : kInf;
        if (open.top().bound >= cut) {
            // every open node is already within the gap of the incumbent
            cut_exhausted = true;
            proven_lb = open.top().bound;
            break;
        }
        if (seconds_since(t0) > opt.time_limit ||
            (opt.node_limit >= 0 && nodes >= opt.node_limit)) {
            stopped = true;
            break;
        }
        Frame fr = open.top();
        open.pop();
        ++nodes;

        spx.reset_var_bounds();
        for (const Fix& f : fr.fixes) spx.set_var_bounds(f.var, f.value, f.value);
        Simplex::Status st = nodes % 256 == 0 ? spx.primal_from_scratch()
                                              : spx.dual_reoptimize();
        if (st == Simplex::Status::Infeasible) continue;
        if (st == Simplex::Status::Unbounded) {
            out.status = Solution::Status::Unbounded;
            out.note = "relaxation unbounded";
            out.nodes_explored = nodes;
            out.wall_time = seconds_since(t0);
            return out;
        }
        double obj;
        if (st == Simplex::Status::IterLimit) {
            obj = fr.bound; // keep the parent bound; do not prune on it
            if (out.note.empty())
                out.note = "relaxation iteration limit; bound weakened";
        } else {
            obj = spx.objective();
        }
        if (obj >= cut) continue;
        if (seconds_since(t0) > opt.time_limit) {
            // the relaxation ran past the deadline; keep the node so the
            // reported bound stays honest, then stop
            open.push(Frame{std::move(fr.fixes), obj, seq++});
            stopped = true;
            break;
        }

        std::vector<double> vals = spx.solution();
        int bvar = -1;
        double frac = 1e-6;
        for (int v : bins) {
            double f = std::min(vals[v], 1.0 - vals[v]);
            if (f > frac) {
                frac = f;
                bvar = v;
            }
        }
        if (bvar < 0) {
            // integral point
            if (st == Simplex::Status::IterLimit) {
                if (!model.check_point(vals)) {
                    double o = model.objective_value(vals);
                    if (o < best - 1e-12) {
                        best = o;
                        best_vals = std::move(vals);
                    }
                }
            } else if (obj < best - 1e-12) {
                best = obj;
                best_vals = std::move(vals);
            }
            continue;
        }

        if (have_ctx)
            try_rounding(model, *ctx.maps, *ctx.graph, *view, vals, best,
                         best_vals);

        double near = vals[bvar] >= 0.5 ? 1.0 : 0.0;
        Frame close{fr.fixes, obj, seq++};
        close.fixes.push_back({bvar, near});
        Frame far{std::move(fr.fixes), obj, seq++};
        far.fixes.push_back({bvar, 1.0 - near});
        open.push(std::move(close));
        open.push(std::move(far));
    }

    out.nodes_explored = nodes;
    out.wall_time = seconds_since(t0);
    out.objective = best;
    out.values = std::move(best_vals);
    if (stopped) {
        out.status = Solution::Status::TimeLimit;
        double lb = best;
        if (!open.empty()) lb = std::min(lb, open.top().bound);
        out.best_bound = lb;
        if (out.note.empty())
            out.note = best < kInf ? "stopped at limit; best incumbent kept"
                                   : "stopped at limit before any incumbent";
    } else if (best < kInf) {
        out.status = Solution::Status::Optimal;
        out.best_bound = cut_exhausted ? std::min(best, proven_lb) : best;
    } else {
        out.status = Solution::Status::Infeasible;
        out.best_bound = kInf;
    }
    return out;
}

Mapping improve_local(const AppGraph& g, const Platform& pf,
                      const TimingModel& tm, const Mapping& start,
                      const LocalSearchOptions& opt) {
    TimingView view(g, pf, tm);
    Mapping cur = start;
    double cur_score = evaluate(g, pf, tm, cur, opt.eval).makespan;
    long moves = 0;

    bool improved = true;
    while (improved && moves < opt.move_budget) {
        improved = false;
        for (const Node& nd : g.nodes) {
            for (int u = 0; u < view.unit_count(); ++u) {
                const std::string& uid = view.unit_id(u);
                if (cur.at.at(nd.id) == uid) continue;
                if (!view.compatible(nd.id, u)) continue;
                if (moves >= opt.move_budget) break;
                Mapping next = cur;
                next.at[nd.id] = uid;
                if (!verify_mapping(g, pf, tm, next).empty()) continue;
                ++moves;
                double s = evaluate(g, pf, tm, next, opt.eval).makespan;
                if (s < cur_score - 1e-12) {
                    cur = std::move(next);
                    cur_score = s;
                    improved = true;
                    break;
                }
            }
            if (improved) break;
        }
    }
    return cur;
}

} // namespace hetmap

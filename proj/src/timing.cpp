#include "hetmap/timing.hpp"

#include <algorithm>

namespace hetmap {

TimingView::TimingView(const AppGraph& g, const Platform& pf,
                       const TimingModel& tm)
    : g_(&g), pf_(&pf), tm_(&tm) {
    proc_count_ = static_cast<int>(pf.procs.size());
    for (const ProcUnit& p : pf.procs) {
        units_.push_back(p.id);
        proc_ref_.push_back(&p);
        rate_.push_back(kInf);
    }
    for (const MemoryUnit& m : pf.memories) {
        units_.push_back(m.id);
        mem_ref_.push_back(&m);
        rate_.push_back(m.is_virtual ? kInf : memory_rate(m));
    }

    int n = unit_count();
    spb_.assign(n, std::vector<double>(n, kInf));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a == b) {
                spb_[a][b] = 0.0;
                continue;
            }
            bool am = is_mem(a), bm = is_mem(b);
            if (am && bm) {
                const MemoryUnit* ma = mem_ref_[a - proc_count_];
                const MemoryUnit* mb = mem_ref_[b - proc_count_];
                if (ma->is_virtual || mb->is_virtual) continue; // kInf
                auto limit = pf.link_limit(ma->id, mb->id);
                if (!limit) continue; // unlinked
                double rate = std::min({memory_rate(*ma), memory_rate(*mb), *limit});
                if (rate > 0.0) spb_[a][b] = 1.0 / rate;
            } else if (am != bm) {
                int mem = am ? a : b;
                const MemoryUnit* mu = mem_ref_[mem - proc_count_];
                int proc = am ? b : a;
                if (mu->is_virtual) {
                    if (mu->owner == units_[proc]) spb_[a][b] = 0.0;
                    // else unreachable: kInf
                } else {
                    spb_[a][b] = 1.0 / memory_rate(*mu);
                }
            }
            // proc <-> proc stays kInf: transfers happen between memories only
        }
    }
}

int TimingView::unit_index(const std::string& id) const {
    for (int i = 0; i < unit_count(); ++i)
        if (units_[i] == id) return i;
    return -1;
}

bool TimingView::dataflow(int u) const {
    return is_proc(u) && proc_ref_[u]->dataflow;
}

double TimingView::capacity(int u) const {
    return is_proc(u) ? proc_ref_[u]->area_capacity : 0.0;
}

bool TimingView::compatible(int node, int u) const {
    const Node& n = g_->nodes[node];
    if (is_memory_role(n.kind) != is_mem(u)) return false;
    if (is_mem(u)) {
        auto cap = tm_->rules.mem_byte_cap.find(units_[u]);
        if (cap != tm_->rules.mem_byte_cap.end() && n.data_bytes > cap->second)
            return false;
    }
    auto allow = tm_->rules.allow.find(node);
    if (allow != tm_->rules.allow.end()) {
        const auto& list = allow->second;
        if (std::find(list.begin(), list.end(), units_[u]) == list.end())
            return false;
    }
    return true;
}

std::vector<int> TimingView::candidates(int node) const {
    std::vector<int> out;
    for (int u = 0; u < unit_count(); ++u)
        if (compatible(node, u)) out.push_back(u);
    return out;
}

double TimingView::estimate_exec(int node, int u) const {
    const Node& n = g_->nodes[node];
    if (is_memory_role(n.kind)) return 0.0;
    const ProcUnit& dev = *proc_ref_[u];
    auto [rs, rp] = proc_rates(dev);
    const TaskAttrs& a = *n.attrs;
    double work = a.complexity * n.data_bytes; // operations
    double t = work / (rs * (1.0 - a.parallelizability + a.parallelizability * rp));
    if (dev.dataflow && a.area <= dev.area_capacity) t /= a.streamability;
    return t;
}

double TimingView::exec(int node, int u) const {
    if (!compatible(node, u)) return kInf;
    const Node& n = g_->nodes[node];
    if (is_memory_role(n.kind)) return 0.0;
    switch (tm_->backend) {
        case TimingModel::Backend::Estimate:
            return estimate_exec(node, u);
        case TimingModel::Backend::Table: {
            auto it = tm_->exec_table.find({node, units_[u]});
            if (it == tm_->exec_table.end())
                throw error("missing exec table entry for node " +
                            std::to_string(node) + " on " + units_[u]);
            return it->second;
        }
        case TimingModel::Backend::Mixed: {
            auto it = tm_->exec_table.find({node, units_[u]});
            if (it != tm_->exec_table.end()) return it->second;
            return tm_->mixed_penalty * estimate_exec(node, u);
        }
    }
    return kInf;
}

double TimingView::out_bytes(int node) const {
    const Node& n = g_->nodes[node];
    if (n.kind == NodeKind::Compute && n.attrs)
        return n.attrs->data_ratio * n.data_bytes;
    return n.data_bytes;
}

double TimingView::estimate_transport(int producer, int from_u, int to_u) const {
    if (from_u == to_u) return 0.0;
    double spb = spb_[from_u][to_u];
    if (is_inf(spb)) return kInf;
    return out_bytes(producer) * spb;
}

double TimingView::transport(int producer, int from_u, int to_u) const {
    if (from_u == to_u) return 0.0;
    switch (tm_->backend) {
        case TimingModel::Backend::Estimate:
            return estimate_transport(producer, from_u, to_u);
        case TimingModel::Backend::Table: {
            auto it = tm_->transport_table.find(
                {producer, units_[from_u], units_[to_u]});
            if (it == tm_->transport_table.end())
                throw error("missing transport table entry for node " +
                            std::to_string(producer) + " from " +
                            units_[from_u] + " to " + units_[to_u]);
            return it->second;
        }
        case TimingModel::Backend::Mixed: {
            auto it = tm_->transport_table.find(
                {producer, units_[from_u], units_[to_u]});
            if (it != tm_->transport_table.end()) return it->second;
            return tm_->mixed_penalty *
                   estimate_transport(producer, from_u, to_u);
        }
    }
    return kInf;
}

bool compatible(const AppGraph& g, const Platform& pf, const TimingModel& tm,
                int node, const std::string& unit) {
    TimingView view(g, pf, tm);
    int u = view.unit_index(unit);
    return u >= 0 && view.compatible(node, u);
}

double exec_time(const AppGraph& g, const Platform& pf, const TimingModel& tm,
                 int node, const std::string& unit) {
    TimingView view(g, pf, tm);
    int u = view.unit_index(unit);
    if (u < 0) throw error("unknown unit: " + unit);
    return view.exec(node, u);
}

double transport_time(const AppGraph& g, const Platform& pf,
                      const TimingModel& tm, int producer,
                      const std::string& from, const std::string& to) {
    TimingView view(g, pf, tm);
    int a = view.unit_index(from), b = view.unit_index(to);
    if (a < 0) throw error("unknown unit: " + from);
    if (b < 0) throw error("unknown unit: " + to);
    return view.transport(producer, a, b);
}

} // namespace hetmap

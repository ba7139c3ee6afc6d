#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "hetmap/appgraph.hpp"
#include "hetmap/platform.hpp"

namespace hetmap {

// Extra compatibility restrictions layered on top of the role match.
struct CompatRules {
    std::map<std::string, double> mem_byte_cap; // memory id -> max bytes held
    std::map<int, std::vector<std::string>> allow; // node id -> allowed units

    bool operator==(const CompatRules&) const = default;
};

struct TimingModel {
    enum class Backend { Estimate, Table, Mixed };
    Backend backend = Backend::Estimate;
    // Measured tables: (node, unit) -> seconds and (node, from, to) -> seconds.
    std::map<std::pair<int, std::string>, double> exec_table;
    std::map<std::tuple<int, std::string, std::string>, double> transport_table;
    double mixed_penalty = 1.0; // multiplier >= 1 on estimated fallback entries
    CompatRules rules;

    bool operator==(const TimingModel&) const = default;
};

// Bound view over (graph, platform, model) with integer unit indices:
// procs first, then memories, in platform declaration order.
class TimingView {
public:
    TimingView(const AppGraph& g, const Platform& pf, const TimingModel& tm);

    int unit_count() const { return static_cast<int>(units_.size()); }
    const std::string& unit_id(int u) const { return units_[u]; }
    int unit_index(const std::string& id) const; // -1 when unknown
    bool is_proc(int u) const { return u < proc_count_; }
    bool is_mem(int u) const { return u >= proc_count_; }
    int proc_count() const { return proc_count_; }
    bool dataflow(int u) const;
    double capacity(int u) const;

    const AppGraph& graph() const { return *g_; }
    const Platform& platform() const { return *pf_; }
    const TimingModel& model() const { return *tm_; }

    bool compatible(int node, int u) const;
    // C_i: compatible unit indices in unit order.
    std::vector<int> candidates(int node) const;

    // t_{ip}; +inf for incompatible pairs.
    double exec(int node, int u) const;
    // d_{ipq} for data produced at `producer` moving from unit `from_u` to
    // unit `to_u`; 0 when from == to, +inf when no route exists.
    double transport(int producer, int from_u, int to_u) const;

    // Memory rate by unit index (kInf for virtual memories); used by the
    // bus-overlap extension to compare bus speeds.
    double rate_of(int u) const { return rate_[u]; }

    // Bytes leaving `node` (computes scale by data_ratio).
    double out_bytes(int node) const;

private:
    const AppGraph* g_;
    const Platform* pf_;
    const TimingModel* tm_;
    std::vector<std::string> units_;
    int proc_count_ = 0;
    std::vector<double> rate_;               // per unit; procs/virtual = kInf
    std::vector<std::vector<double>> spb_;   // seconds per byte, unit x unit
    std::vector<const ProcUnit*> proc_ref_;
    std::vector<const MemoryUnit*> mem_ref_; // index - proc_count_

    double estimate_exec(int node, int u) const;
    double estimate_transport(int producer, int from_u, int to_u) const;
};

// Convenience single-call forms matching the view methods.
bool compatible(const AppGraph& g, const Platform& pf, const TimingModel& tm,
                int node, const std::string& unit);
double exec_time(const AppGraph& g, const Platform& pf, const TimingModel& tm,
                 int node, const std::string& unit);
double transport_time(const AppGraph& g, const Platform& pf,
                      const TimingModel& tm, int producer,
                      const std::string& from, const std::string& to);

} // namespace hetmap

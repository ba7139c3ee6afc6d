#include "hetmap/serialize.hpp"

#include <json.hpp>

namespace hetmap {

using nlohmann::json;

namespace {

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw error(std::string("invalid ") + what + " JSON");
    return j;
}

double num_or(const json& j, const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_number()) throw error(std::string(key) + " must be a number");
    return it->get<double>();
}

json inf_safe(double v) {
    // JSON has no infinity literal; represent it as the string "inf".
    if (is_inf(v)) return "inf";
    return v;
}

double inf_parse(const json& j, const char* what) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kInf;
        throw error(std::string(what) + ": bad value");
    }
    if (!j.is_number()) throw error(std::string(what) + " must be a number");
    return j.get<double>();
}

} // namespace

std::string graph_to_json(const AppGraph& g) {
    json nodes = json::array();
    for (const Node& n : g.nodes) {
        json jn{{"id", n.id},
                {"kind", kind_name(n.kind)},
                {"data_bytes", n.data_bytes}};
        if (n.attrs) {
            jn["attrs"] = {{"parallelizability", n.attrs->parallelizability},
                           {"complexity", n.attrs->complexity},
                           {"data_ratio", n.attrs->data_ratio},
                           {"streamability", n.attrs->streamability},
                           {"area", n.attrs->area}};
        }
        nodes.push_back(std::move(jn));
    }
    json edges = json::array();
    for (const auto& [u, v] : g.edges) edges.push_back(json::array({u, v}));
    json j{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
    return j.dump(2) + "\n";
}

AppGraph graph_from_json(const std::string& text) {
    json j = parse(text, "graph");
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
        throw error("graph JSON must have nodes and edges");
    AppGraph g;
    for (const json& jn : j["nodes"]) {
        Node n;
        if (!jn.contains("id") || !jn.contains("kind"))
            throw error("graph node missing id or kind");
        n.id = jn["id"].get<int>();
        n.kind = kind_from_name(jn["kind"].get<std::string>());
        n.data_bytes = num_or(jn, "data_bytes", 0.0);
        if (jn.contains("attrs") && !jn["attrs"].is_null()) {
            const json& a = jn["attrs"];
            TaskAttrs at;
            at.parallelizability = num_or(a, "parallelizability", 0.0);
            at.complexity = num_or(a, "complexity", 1.0);
            at.data_ratio = num_or(a, "data_ratio", 1.0);
            at.streamability = num_or(a, "streamability", 1.0);
            at.area = num_or(a, "area", 0.0);
            n.attrs = at;
        }
        g.nodes.push_back(std::move(n));
    }
    for (size_t k = 0; k < g.nodes.size(); ++k)
        if (g.nodes[k].id != static_cast<int>(k))
            throw error("graph JSON node ids must be dense and ordered");
    for (const json& je : j["edges"]) {
        if (!je.is_array() || je.size() != 2)
            throw error("graph edge must be a pair");
        g.edges.emplace_back(je[0].get<int>(), je[1].get<int>());
    }
    g.sort_edges();
    return g;
}

std::string platform_to_json(const Platform& pf) {
    json procs = json::array();
    for (const ProcUnit& p : pf.procs)
        procs.push_back({{"id", p.id},
                         {"clock_hz", p.clock},
                         {"overhead_penalty", p.overhead_penalty},
                         {"cores", p.cores},
                         {"data_parallelism", p.data_parallelism},
                         {"dataflow", p.dataflow},
                         {"area_capacity", p.area_capacity}});
    json mems = json::array();
    for (const MemoryUnit& m : pf.memories) {
        json jm{{"id", m.id},
                {"explicit_rate", m.explicit_rate},
                {"bus_clock", m.bus_clock},
                {"bus_width", m.bus_width},
                {"channels", m.channels},
                {"virtual", m.is_virtual}};
        if (!m.owner.empty()) jm["owner"] = m.owner;
        mems.push_back(std::move(jm));
    }
    json assoc = json::array();
    for (const auto& [proc, list] : pf.assoc)
        assoc.push_back(json::array({proc, list}));
    json links = json::array();
    for (const Link& l : pf.links)
        links.push_back(json::array({l.a, l.b, inf_safe(l.rate_limit)}));
    json j{{"procs", std::move(procs)},
           {"memories", std::move(mems)},
           {"assoc", std::move(assoc)},
           {"links", std::move(links)}};
    return j.dump(2) + "\n";
}

Platform platform_from_json(const std::string& text) {
    json j = parse(text, "platform");
    Platform pf;
    if (!j.is_object()) throw error("platform JSON must be an object");
    for (const json& jp : j.value("procs", json::array())) {
        ProcUnit p;
        p.id = jp.at("id").get<std::string>();
        p.clock = num_or(jp, "clock_hz", 0.0);
        p.overhead_penalty = num_or(jp, "overhead_penalty", 1.0);
        p.cores = num_or(jp, "cores", 1.0);
        p.data_parallelism = num_or(jp, "data_parallelism", 1.0);
        p.dataflow = jp.value("dataflow", false);
        p.area_capacity = num_or(jp, "area_capacity", 0.0);
        pf.procs.push_back(std::move(p));
    }
    for (const json& jm : j.value("memories", json::array())) {
        MemoryUnit m;
        m.id = jm.at("id").get<std::string>();
        m.explicit_rate = num_or(jm, "explicit_rate", 0.0);
        m.bus_clock = num_or(jm, "bus_clock", 0.0);
        m.bus_width = num_or(jm, "bus_width", 0.0);
        m.channels = num_or(jm, "channels", 0.0);
        m.is_virtual = jm.value("virtual", false);
        m.owner = jm.value("owner", std::string());
        pf.memories.push_back(std::move(m));
    }
    for (const json& ja : j.value("assoc", json::array())) {
        if (!ja.is_array() || ja.size() != 2)
            throw error("platform assoc entries must be [proc, [mems...]]");
        pf.assoc.emplace_back(ja[0].get<std::string>(),
                              ja[1].get<std::vector<std::string>>());
    }
    for (const json& jl : j.value("links", json::array())) {
        if (!jl.is_array() || jl.size() != 3)
            throw error("platform link entries must be [a, b, rate]");
        Link l;
        l.a = jl[0].get<std::string>();
        l.b = jl[1].get<std::string>();
        l.rate_limit = inf_parse(jl[2], "link rate");
        pf.links.push_back(std::move(l));
    }
    return pf;
}

std::string timing_to_json(const TimingModel& tm) {
    const char* backend = tm.backend == TimingModel::Backend::Estimate ? "estimate"
                          : tm.backend == TimingModel::Backend::Table  ? "table"
                                                                       : "mixed";
    json exec = json::array();
    for (const auto& [key, s] : tm.exec_table)
        exec.push_back(json::array({key.first, key.second, s}));
    json transport = json::array();
    for (const auto& [key, s] : tm.transport_table)
        transport.push_back(json::array(
            {std::get<0>(key), std::get<1>(key), std::get<2>(key), s}));
    json rules;
    json caps = json::object();
    for (const auto& [mem, cap] : tm.rules.mem_byte_cap) caps[mem] = cap;
    json allow = json::object();
    for (const auto& [node, units] : tm.rules.allow)
        allow[std::to_string(node)] = units;
    rules["mem_byte_cap"] = std::move(caps);
    rules["allow"] = std::move(allow);
    json j{{"backend", backend},
           {"exec", std::move(exec)},
           {"transport", std::move(transport)},
           {"mixed_penalty", tm.mixed_penalty},
           {"rules", std::move(rules)}};
    return j.dump(2) + "\n";
}

TimingModel timing_from_json(const std::string& text) {
    json j = parse(text, "timing");
    TimingModel tm;
    std::string backend = j.value("backend", std::string("estimate"));
    if (backend == "estimate") tm.backend = TimingModel::Backend::Estimate;
    else if (backend == "table") tm.backend = TimingModel::Backend::Table;
    else if (backend == "mixed") tm.backend = TimingModel::Backend::Mixed;
    else throw error("unknown timing backend: " + backend);
    for (const json& je : j.value("exec", json::array())) {
        if (!je.is_array() || je.size() != 3)
            throw error("timing exec entries must be [node, unit, seconds]");
        tm.exec_table[{je[0].get<int>(), je[1].get<std::string>()}] =
            je[2].get<double>();
    }
    for (const json& jt : j.value("transport", json::array())) {
        if (!jt.is_array() || jt.size() != 4)
            throw error(
                "timing transport entries must be [node, from, to, seconds]");
        tm.transport_table[{jt[0].get<int>(), jt[1].get<std::string>(),
                            jt[2].get<std::string>()}] = jt[3].get<double>();
    }
    tm.mixed_penalty = num_or(j, "mixed_penalty", 1.0);
    if (j.contains("rules")) {
        const json& r = j["rules"];
        if (r.contains("mem_byte_cap"))
            for (auto it = r["mem_byte_cap"].begin();
                 it != r["mem_byte_cap"].end(); ++it)
                tm.rules.mem_byte_cap[it.key()] = it.value().get<double>();
        if (r.contains("allow"))
            for (auto it = r["allow"].begin(); it != r["allow"].end(); ++it)
                tm.rules.allow[std::stoi(it.key())] =
                    it.value().get<std::vector<std::string>>();
    }
    return tm;
}

std::string mapping_to_json(const Mapping& m) {
    json arr = json::array();
    for (const auto& [node, unit] : m.at)
        arr.push_back(json::array({node, unit}));
    json j{{"assignments", std::move(arr)}};
    return j.dump(2) + "\n";
}

Mapping mapping_from_json(const std::string& text) {
    json j = parse(text, "mapping");
    Mapping m;
    if (!j.is_object() || !j.contains("assignments"))
        throw error("mapping JSON must have an assignments array");
    for (const json& ja : j["assignments"]) {
        if (!ja.is_array() || ja.size() != 2)
            throw error("mapping assignments must be [node, unit] pairs");
        m.at[ja[0].get<int>()] = ja[1].get<std::string>();
    }
    return m;
}

std::string timeline_to_json(const Timeline& tl, double makespan) {
    json events = json::array();
    for (const Event& e : tl.events)
        events.push_back({{"node", e.node},
                          {"unit", e.unit},
                          {"start", e.start},
                          {"end", e.end},
                          {"kind", event_kind_name(e.kind)}});
    json clocks = json::object();
    for (const auto& [unit, t] : tl.clocks) clocks[unit] = t;
    json ready = json::array();
    for (const auto& [node, t] : tl.data_ready)
        ready.push_back(json::array({node, t}));
    json j{{"makespan", inf_safe(makespan)},
           {"clocks", std::move(clocks)},
           {"events", std::move(events)},
           {"data_ready", std::move(ready)}};
    if (!tl.note.empty()) j["note"] = tl.note;
    return j.dump(2) + "\n";
}

std::pair<Timeline, double> timeline_from_json(const std::string& text) {
    json j = parse(text, "timeline");
    Timeline tl;
    double makespan = 0.0;
    if (j.contains("makespan")) makespan = inf_parse(j["makespan"], "makespan");
    if (j.contains("clocks"))
        for (auto it = j["clocks"].begin(); it != j["clocks"].end(); ++it)
            tl.clocks[it.key()] = it.value().get<double>();
    for (const json& je : j.value("events", json::array())) {
        Event e;
        e.node = je.at("node").get<int>();
        e.unit = je.at("unit").get<std::string>();
        e.start = je.at("start").get<double>();
        e.end = je.at("end").get<double>();
        std::string kind = je.at("kind").get<std::string>();
        if (kind == "compute") e.kind = EventKind::Compute;
        else if (kind == "read") e.kind = EventKind::Read;
        else if (kind == "write") e.kind = EventKind::Write;
        else if (kind == "transfer") e.kind = EventKind::Transfer;
        else throw error("unknown event kind: " + kind);
        tl.events.push_back(std::move(e));
    }
    for (const json& jr : j.value("data_ready", json::array())) {
        if (!jr.is_array() || jr.size() != 2)
            throw error("data_ready entries must be [node, time]");
        tl.data_ready[jr[0].get<int>()] = jr[1].get<double>();
    }
    tl.note = j.value("note", std::string());
    return {std::move(tl), makespan};
}

} // namespace hetmap

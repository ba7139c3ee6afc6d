#include "hetmap/experiment.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <thread>

#include "hetmap/evaluator.hpp"
#include "hetmap/lpformat.hpp"
#include "hetmap/serialize.hpp"

namespace hetmap {

using nlohmann::json;

Platform resolve_platform(const std::string& name_or_path) {
    if (name_or_path == "CG" || name_or_path == "CGF" ||
        name_or_path == "CGFF")
        return preset(name_or_path);
    return platform_from_json(read_text_file(name_or_path));
}

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

} // namespace

Solution solve_external(const MilpModel& model) {
    const char* tmpl = std::getenv("HETMAP_EXTERNAL_SOLVER");
    if (!tmpl || !*tmpl)
        throw error("HETMAP_EXTERNAL_SOLVER is not set; expected a command "
                    "template with {lp} and {sol} placeholders");
    static std::atomic<int> counter{0};
    std::string base =
        (std::filesystem::temp_directory_path() /
         ("hetmap_" + std::to_string(::getpid()) + "_" +
          std::to_string(counter.fetch_add(1))))
            .string();
    std::string lp_path = base + ".lp", sol_path = base + ".sol";
    export_lp(model, lp_path);

    std::string cmd(tmpl);
    auto substitute = [&](const std::string& key, const std::string& value) {
        size_t pos;
        while ((pos = cmd.find(key)) != std::string::npos)
            cmd.replace(pos, key.size(), value);
    };
    substitute("{lp}", lp_path);
    substitute("{sol}", sol_path);

    int rc = std::system(cmd.c_str());
    if (rc != 0) {
        std::filesystem::remove(lp_path);
        throw error("external solver command failed with exit status " +
                    std::to_string(rc) + ": " + cmd);
    }
    Solution sol = import_solution_file(sol_path, model);
    std::filesystem::remove(lp_path);
    std::filesystem::remove(sol_path);
    return sol;
}

namespace {

struct StrategyOutcome {
    Solution sol;
    Mapping mapping;
    bool have_mapping = false;
};

StrategyOutcome run_strategy(const AppGraph& g, const Platform& pf,
                             const TimingModel& tm, Formulation form,
                             const ExperimentConfig& config) {
    StrategyOutcome out;
    if (config.mode == ExperimentConfig::Mode::Exhaustive) {
        auto [sol, mapping] = solve_exhaustive(g, pf, tm, form, config.solver);
        out.sol = std::move(sol);
        out.mapping = std::move(mapping);
        out.have_mapping = out.sol.status == Solution::Status::Optimal;
        return out;
    }

    MilpModel model;
    BuildMaps maps;
    if (form == Formulation::Device) {
        std::tie(model, maps) = build_device_based(g, pf, tm);
    } else {
        std::vector<int> order = topsort_bfs(g);
        std::tie(model, maps) = build_time_based(g, pf, tm, order,
                                                 config.time_model);
        if (form == Formulation::TimeStreaming)
            add_streaming_extension(model, maps, g, pf, tm);
    }

    if (config.mode == ExperimentConfig::Mode::External) {
        out.sol = solve_external(model);
    } else {
        BnbContext ctx{&g, &pf, &tm, &maps};
        out.sol = solve_bnb(model, config.solver, ctx);
    }
    if (!out.sol.values.empty() &&
        (out.sol.status == Solution::Status::Optimal ||
         out.sol.status == Solution::Status::Feasible ||
         out.sol.status == Solution::Status::TimeLimit)) {
        out.mapping = extract_mapping(out.sol, maps);
        out.have_mapping = true;
    }
    return out;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    if (config.count < 1) throw error("experiment count must be >= 1");
    if (config.edges < 1) throw error("experiment edges must be >= 1");
    if (config.strategies.empty())
        throw error("experiment needs at least one strategy");

    Platform pf = resolve_platform(config.platform);
    TimingModel tm;
    int S = static_cast<int>(config.strategies.size());

    ExperimentReport report;
    report.config = config;
    report.rows.assign(static_cast<size_t>(config.count) * S, ExperimentRow{});

    std::vector<uint64_t> seeds(config.count);
    Rng root(config.seed);
    for (int i = 0; i < config.count; ++i) seeds[i] = root.next();

    auto run_graph = [&](int gi) {
        uint64_t gs = seeds[gi];
        ExperimentRow base_row;
        base_row.graph_seed = gs;
        AppGraph g;
        try {
            AppGraph skel = gen_series_parallel(config.edges, gs);
            Rng attr_rng(gs ^ 0x9e3779b97f4a7c15ULL);
            AttrsSampler sampler =
                config.constant_complexity
                    ? constant_complexity_sampler(attr_rng,
                                                  config.complexity_value)
                    : default_sampler(attr_rng);
            g = expand_tasks(skel, sampler, config.source_bytes);
            if (config.fixed_task_load)
                set_uniform_load(g, config.task_load_bytes);
            base_row.nodes = static_cast<int>(g.nodes.size());
            base_row.edges = static_cast<int>(g.edges.size());
            EvalOptions base_eval;
            base_eval.bus_overlap = config.bus_overlap;
            base_row.baseline_s =
                evaluate(g, pf, tm, all_cpu_mapping(g, pf), base_eval).makespan;
        } catch (const std::exception& e) {
            for (int si = 0; si < S; ++si) {
                ExperimentRow row = base_row;
                row.strategy = formulation_name(config.strategies[si]);
                row.status = "error";
                row.note = e.what();
                report.rows[static_cast<size_t>(gi) * S + si] = std::move(row);
            }
            return;
        }

        for (int si = 0; si < S; ++si) {
            Formulation form = config.strategies[si];
            ExperimentRow row = base_row;
            row.strategy = formulation_name(form);
            try {
                StrategyOutcome oc = run_strategy(g, pf, tm, form, config);
                row.status = status_name(oc.sol.status);
                row.solve_s = oc.sol.wall_time;
                row.note = oc.sol.note;
                if (oc.have_mapping) {
                    EvalOptions eo;
                    eo.bus_overlap = config.bus_overlap;
                    eo.streaming = form == Formulation::TimeStreaming;
                    row.makespan_s = evaluate(g, pf, tm, oc.mapping, eo).makespan;
                    row.ok = !is_inf(row.makespan_s);
                    if (row.ok && row.baseline_s > 0.0)
                        row.pct_change = (row.baseline_s - row.makespan_s) /
                                         row.baseline_s * 100.0;
                    int same = 0;
                    for (const auto& [u, v] : g.edges)
                        if (oc.mapping.at.at(u) == oc.mapping.at.at(v)) ++same;
                    row.same_unit_frac =
                        g.edges.empty()
                            ? 0.0
                            : static_cast<double>(same) /
                                  static_cast<double>(g.edges.size());
                }
            } catch (const std::exception& e) {
                row.ok = false;
                row.status = "error";
                row.note = e.what();
            }
            report.rows[static_cast<size_t>(gi) * S + si] = std::move(row);
        }
    };

    int T = std::max(1, config.threads);
    if (T == 1) {
        for (int gi = 0; gi < config.count; ++gi) run_graph(gi);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < T; ++t)
            pool.emplace_back([&, t] {
                for (int gi = t; gi < config.count; gi += T) run_graph(gi);
            });
        for (std::thread& th : pool) th.join();
    }

    for (int si = 0; si < S; ++si) {
        ExperimentAggregate agg;
        agg.strategy = formulation_name(config.strategies[si]);
        double sum_pct = 0.0, sum_frac = 0.0;
        for (int gi = 0; gi < config.count; ++gi) {
            const ExperimentRow& row =
                report.rows[static_cast<size_t>(gi) * S + si];
            ++agg.count;
            if (!row.ok) {
                ++agg.failures;
                continue;
            }
            if (agg.successes == 0) {
                agg.min_pct = agg.max_pct = row.pct_change;
            } else {
                agg.min_pct = std::min(agg.min_pct, row.pct_change);
                agg.max_pct = std::max(agg.max_pct, row.pct_change);
            }
            ++agg.successes;
            sum_pct += row.pct_change;
            sum_frac += row.same_unit_frac;
            if (row.pct_change > 0.0) ++agg.improved;
        }
        if (agg.successes > 0) {
            agg.avg_pct = sum_pct / agg.successes;
            agg.avg_same_unit_frac = sum_frac / agg.successes;
        }
        report.aggregates.push_back(std::move(agg));
    }
    return report;
}

std::string report_csv(const ExperimentReport& report) {
    std::string out =
        "seed,nodes,edges,baseline_s,strategy,makespan_s,pct_change,status,"
        "solve_s\n";
    for (const ExperimentRow& row : report.rows) {
        out += std::to_string(row.graph_seed) + ',';
        out += std::to_string(row.nodes) + ',';
        out += std::to_string(row.edges) + ',';
        out += fmt("%.12g", row.baseline_s) + ',';
        out += row.strategy + ',';
        if (row.ok) {
            out += fmt("%.12g", row.makespan_s) + ',';
            out += fmt("%.6g", row.pct_change) + ',';
        } else {
            out += ",,";
        }
        out += row.status + ',';
        if (report.config.include_timings) out += fmt("%.3f", row.solve_s);
        out += '\n';
    }
    return out;
}

std::string config_to_json(const ExperimentConfig& config) {
    json strategies = json::array();
    for (Formulation f : config.strategies)
        strategies.push_back(formulation_name(f));
    const char* mode = config.mode == ExperimentConfig::Mode::Bnb ? "bnb"
                       : config.mode == ExperimentConfig::Mode::Exhaustive
                           ? "exhaustive"
                           : "external";
    json j{{"platform", config.platform},
           {"edges", config.edges},
           {"count", config.count},
           {"seed", config.seed},
           {"source_bytes", config.source_bytes},
           {"fixed_task_load", config.fixed_task_load},
           {"task_load_bytes", config.task_load_bytes},
           {"complexity", config.constant_complexity
                              ? json(config.complexity_value)
                              : json("lognormal")},
           {"strategies", std::move(strategies)},
           {"mode", mode},
           {"solver",
            {{"time_limit", config.solver.time_limit},
             {"gap", config.solver.gap},
             {"node_limit", config.solver.node_limit},
             {"enum_budget", config.solver.enum_budget}}},
           {"time_model",
            {{"pairs", config.time_model.pairs == TimeOptions::Pairs::All
                           ? "all"
                           : "path-pruned"},
             {"scope",
              config.time_model.scope == TimeOptions::OrderingScope::AllUnits
                  ? "all"
                  : "proc-only"}}},
           {"bus_overlap", config.bus_overlap},
           {"include_timings", config.include_timings},
           {"threads", config.threads}};
    return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw error("invalid experiment config JSON");
    ExperimentConfig c;
    c.platform = j.value("platform", c.platform);
    c.edges = j.value("edges", c.edges);
    c.count = j.value("count", c.count);
    c.seed = j.value("seed", c.seed);
    c.source_bytes = j.value("source_bytes", c.source_bytes);
    c.fixed_task_load = j.value("fixed_task_load", c.fixed_task_load);
    c.task_load_bytes = j.value("task_load_bytes", c.task_load_bytes);
    if (j.contains("complexity")) {
        if (j["complexity"].is_number()) {
            c.constant_complexity = true;
            c.complexity_value = j["complexity"].get<double>();
        } else if (j["complexity"] == "lognormal") {
            c.constant_complexity = false;
        } else {
            throw error("complexity must be \"lognormal\" or a number");
        }
    }
    if (j.contains("strategies")) {
        c.strategies.clear();
        for (const json& s : j["strategies"])
            c.strategies.push_back(
                formulation_from_name(s.get<std::string>()));
    }
    std::string mode = j.value("mode", std::string("bnb"));
    if (mode == "bnb") c.mode = ExperimentConfig::Mode::Bnb;
    else if (mode == "exhaustive") c.mode = ExperimentConfig::Mode::Exhaustive;
    else if (mode == "external") c.mode = ExperimentConfig::Mode::External;
    else throw error("unknown experiment mode: " + mode);
    if (j.contains("solver")) {
        const json& s = j["solver"];
        c.solver.time_limit = s.value("time_limit", c.solver.time_limit);
        c.solver.gap = s.value("gap", c.solver.gap);
        c.solver.node_limit = s.value("node_limit", c.solver.node_limit);
        c.solver.enum_budget = s.value("enum_budget", c.solver.enum_budget);
    }
    if (j.contains("time_model")) {
        const json& t = j["time_model"];
        std::string pairs = t.value("pairs", std::string("path-pruned"));
        if (pairs == "all") c.time_model.pairs = TimeOptions::Pairs::All;
        else if (pairs == "path-pruned")
            c.time_model.pairs = TimeOptions::Pairs::PathPruned;
        else throw error("unknown pairs option: " + pairs);
        std::string scope = t.value("scope", std::string("proc-only"));
        if (scope == "all")
            c.time_model.scope = TimeOptions::OrderingScope::AllUnits;
        else if (scope == "proc-only")
            c.time_model.scope = TimeOptions::OrderingScope::ProcOnly;
        else throw error("unknown scope option: " + scope);
    }
    c.bus_overlap = j.value("bus_overlap", c.bus_overlap);
    c.include_timings = j.value("include_timings", c.include_timings);
    c.threads = j.value("threads", c.threads);
    return c;
}

std::string report_json(const ExperimentReport& report) {
    json rows = json::array();
    for (const ExperimentRow& row : report.rows) {
        json jr{{"seed", row.graph_seed},
                {"nodes", row.nodes},
                {"edges", row.edges},
                {"baseline_s", row.baseline_s},
                {"strategy", row.strategy},
                {"ok", row.ok},
                {"status", row.status}};
        if (row.ok) {
            jr["makespan_s"] = row.makespan_s;
            jr["pct_change"] = row.pct_change;
            jr["same_unit_frac"] = row.same_unit_frac;
        }
        if (report.config.include_timings) jr["solve_s"] = row.solve_s;
        if (!row.note.empty()) jr["note"] = row.note;
        rows.push_back(std::move(jr));
    }
    json aggs = json::array();
    for (const ExperimentAggregate& a : report.aggregates)
        aggs.push_back({{"strategy", a.strategy},
                        {"count", a.count},
                        {"successes", a.successes},
                        {"improved", a.improved},
                        {"failures", a.failures},
                        {"avg_pct", a.avg_pct},
                        {"min_pct", a.min_pct},
                        {"max_pct", a.max_pct},
                        {"avg_same_unit_frac", a.avg_same_unit_frac}});
    json j{{"config", json::parse(config_to_json(report.config))},
           {"rows", std::move(rows)},
           {"aggregates", std::move(aggs)}};
    return j.dump(2) + "\n";
}

} // namespace hetmap

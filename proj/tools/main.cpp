#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetmap/evaluator.hpp"
#include "hetmap/experiment.hpp"
#include "hetmap/lpformat.hpp"
#include "hetmap/milp.hpp"
#include "hetmap/render.hpp"
#include "hetmap/serialize.hpp"
#include "hetmap/solver.hpp"

namespace {

using namespace hetmap;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kInfeasible = 3;

std::string num17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

AppGraph load_graph(const std::string& path) {
    AppGraph g = graph_from_json(read_text_file(path));
    std::vector<Violation> violations = validate(g);
    if (!violations.empty()) {
        std::string msg = "invalid graph " + path + ":";
        for (const Violation& v : violations) msg += "\n  " + v.message;
        throw error(msg);
    }
    return g;
}

TimingModel load_timing(const std::string& path) {
    if (path.empty()) return TimingModel{};
    return timing_from_json(read_text_file(path));
}

Mapping load_mapping(const AppGraph& g, const Platform& pf,
                     const std::string& spec) {
    if (spec == "all-cpu") return all_cpu_mapping(g, pf);
    return mapping_from_json(read_text_file(spec));
}

// options shared by solve and export-lp
struct ModelArgs {
    std::string graph;
    std::string platform = "CG";
    std::string formulation = "device";
    std::string timing;
    std::string pairs = "all";
    std::string scope = "all";
};

void add_model_args(CLI::App* cmd, ModelArgs& args) {
    cmd->add_option("graph", args.graph, "graph JSON file")->required();
    cmd->add_option("-p,--platform", args.platform,
                    "platform preset (CG, CGF, CGFF) or JSON file");
    cmd->add_option("-f,--formulation", args.formulation,
                    "device, time, or time-streaming")
        ->check(CLI::IsMember({"device", "time", "time-streaming"}));
    cmd->add_option("--timing", args.timing, "measured timing table JSON");
    cmd->add_option("--pairs", args.pairs,
                    "ordering pairs for the time model: all or path-pruned")
        ->check(CLI::IsMember({"all", "path-pruned"}));
    cmd->add_option("--scope", args.scope,
                    "ordering scope for the time model: all or proc-only")
        ->check(CLI::IsMember({"all", "proc-only"}));
}

TimeOptions time_options_of(const ModelArgs& args) {
    TimeOptions to;
    to.pairs = args.pairs == "all" ? TimeOptions::Pairs::All
                                   : TimeOptions::Pairs::PathPruned;
    to.scope = args.scope == "all" ? TimeOptions::OrderingScope::AllUnits
                                   : TimeOptions::OrderingScope::ProcOnly;
    return to;
}

std::pair<MilpModel, BuildMaps> build_model(const AppGraph& g,
                                            const Platform& pf,
                                            const TimingModel& tm,
                                            const ModelArgs& args) {
    Formulation form = formulation_from_name(args.formulation);
    if (form == Formulation::Device) return build_device_based(g, pf, tm);
    auto built = build_time_based(g, pf, tm, topsort_bfs(g), time_options_of(args));
    if (form == Formulation::TimeStreaming)
        add_streaming_extension(built.first, built.second, g, pf, tm);
    return built;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hetmap: task mapping on heterogeneous platforms"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate random task graphs");
    struct {
        int edges = 30;
        int count = 1;
        uint64_t seed = 1;
        bool skeleton = false;
        double source_bytes = 100e6;
        double load = 100e6;
        std::string complexity = "lognormal";
        std::string output;
    } gen_args;
    gen->add_option("-m,--edges", gen_args.edges, "series-parallel size (edges)")
        ->check(CLI::PositiveNumber);
    gen->add_option("-n,--count", gen_args.count, "number of graphs")
        ->check(CLI::PositiveNumber);
    gen->add_option("-s,--seed", gen_args.seed, "random seed");
    gen->add_flag("--skeleton", gen_args.skeleton,
                  "emit the raw skeleton without task expansion");
    gen->add_option("--source-bytes", gen_args.source_bytes,
                    "source data size in bytes");
    gen->add_option("--load", gen_args.load,
                    "fixed per-task input load in bytes (0 = propagate only)");
    gen->add_option("--complexity", gen_args.complexity,
                    "\"lognormal\" or a constant value");
    gen->add_option("-o,--output", gen_args.output, "output JSON path")
        ->required();

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "evaluate a mapping's makespan");
    struct {
        std::string graph;
        std::string platform = "CG";
        std::string mapping = "all-cpu";
        std::string timing;
        bool overlap = false;
        bool streaming = false;
        std::string timeline;
    } eval_args;
    ev->add_option("graph", eval_args.graph, "graph JSON file")->required();
    ev->add_option("-p,--platform", eval_args.platform,
                   "platform preset (CG, CGF, CGFF) or JSON file");
    ev->add_option("--mapping", eval_args.mapping,
                   "mapping JSON file or \"all-cpu\"");
    ev->add_option("--timing", eval_args.timing, "measured timing table JSON");
    ev->add_flag("--overlap", eval_args.overlap, "enable bus overlap");
    ev->add_flag("--streaming", eval_args.streaming,
                 "enable streaming compression");
    ev->add_option("--timeline", eval_args.timeline,
                   "write the timeline JSON here");

    // ---- solve ----
    auto* so = app.add_subcommand("solve", "find a mapping with a solver");
    ModelArgs solve_model;
    struct {
        std::string mode = "bnb";
        double time_limit = 60.0;
        double gap = 1e-6;
        long node_limit = -1;
        long enum_budget = 10000000;
        std::string output;
        std::string timeline;
    } solve_args;
    add_model_args(so, solve_model);
    so->add_option("--mode", solve_args.mode,
                   "bnb, exhaustive, or external (HETMAP_EXTERNAL_SOLVER)")
        ->check(CLI::IsMember({"bnb", "exhaustive", "external"}));
    so->add_option("--time-limit", solve_args.time_limit, "seconds");
    so->add_option("--gap", solve_args.gap, "relative optimality gap");
    so->add_option("--node-limit", solve_args.node_limit,
                   "max branch-and-bound nodes (-1 = unlimited)");
    so->add_option("--enum-budget", solve_args.enum_budget,
                   "max assignments for exhaustive mode");
    so->add_option("-o,--output", solve_args.output, "mapping JSON path");
    so->add_option("--timeline", solve_args.timeline,
                   "write the evaluated timeline JSON here");

    // ---- export-lp ----
    auto* xl = app.add_subcommand("export-lp", "write the MILP as an LP file");
    ModelArgs lp_model;
    std::string lp_output;
    add_model_args(xl, lp_model);
    xl->add_option("-o,--output", lp_output, "LP file path")->required();

    // ---- solve-lp ----
    auto* sl = app.add_subcommand(
        "solve-lp", "solve an LP-format model with the built-in solver");
    struct {
        std::string model;
        std::string output;
        double time_limit = 60.0;
        double gap = 1e-6;
        long node_limit = -1;
    } sl_args;
    sl->add_option("model", sl_args.model, "LP file")->required();
    sl->add_option("-o,--output", sl_args.output, "solution listing path")
        ->required();
    sl->add_option("--time-limit", sl_args.time_limit, "seconds");
    sl->add_option("--gap", sl_args.gap, "relative optimality gap");
    sl->add_option("--node-limit", sl_args.node_limit,
                   "max branch-and-bound nodes (-1 = unlimited)");

    // ---- experiment ----
    auto* ex = app.add_subcommand("experiment",
                                  "run the mapping-strategy comparison");
    struct {
        std::string config;
        std::string platform;
        int edges = -1;
        int count = -1;
        int64_t seed = -1;
        std::vector<std::string> strategies;
        std::string mode;
        std::string complexity;
        long node_limit = -2;
        double time_limit = -1.0;
        bool overlap = false;
        bool no_timings = false;
        int threads = -1;
        std::string output;
    } ex_args;
    ex->add_option("--config", ex_args.config, "experiment config JSON");
    ex->add_option("-p,--platform", ex_args.platform,
                   "platform preset or JSON file");
    ex->add_option("-m,--edges", ex_args.edges, "skeleton size");
    ex->add_option("-n,--count", ex_args.count, "graphs per run");
    ex->add_option("-s,--seed", ex_args.seed, "random seed");
    ex->add_option("--strategies", ex_args.strategies,
                   "subset of device, time, time-streaming");
    ex->add_option("--mode", ex_args.mode, "bnb, exhaustive, or external")
        ->check(CLI::IsMember({"", "bnb", "exhaustive", "external"}));
    ex->add_option("--complexity", ex_args.complexity,
                   "\"lognormal\" or a constant value");
    ex->add_option("--node-limit", ex_args.node_limit,
                   "solver node limit (-1 = unlimited)");
    ex->add_option("--time-limit", ex_args.time_limit, "solver seconds");
    ex->add_flag("--overlap", ex_args.overlap, "evaluate with bus overlap");
    ex->add_flag("--no-timings", ex_args.no_timings,
                 "omit wall times for byte-reproducible reports");
    ex->add_option("--threads", ex_args.threads, "parallel graph workers");
    ex->add_option("-o,--output", ex_args.output,
                   "report stem (writes <stem>.csv and <stem>.json)")
        ->required();

    // ---- render ----
    auto* rd = app.add_subcommand("render", "render DOT graphs or Gantt SVGs");
    struct {
        std::string graph;
        std::string platform = "CG";
        std::string mapping;
        std::string timeline;
        bool overlap = false;
        bool streaming = false;
        std::string dot;
        std::string gantt;
    } rd_args;
    rd->add_option("graph", rd_args.graph, "graph JSON file");
    rd->add_option("-p,--platform", rd_args.platform,
                   "platform preset or JSON file (for --gantt via --mapping)");
    rd->add_option("--mapping", rd_args.mapping,
                   "mapping JSON file or \"all-cpu\"");
    rd->add_option("--timeline", rd_args.timeline,
                   "timeline JSON file (alternative Gantt input)");
    rd->add_flag("--overlap", rd_args.overlap, "evaluate with bus overlap");
    rd->add_flag("--streaming", rd_args.streaming,
                 "evaluate with streaming compression");
    rd->add_option("--dot", rd_args.dot, "DOT output path");
    rd->add_option("--gantt", rd_args.gantt, "SVG output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) {
            Rng root(gen_args.seed);
            bool constant = gen_args.complexity != "lognormal";
            double cval = 0.0;
            if (constant) {
                try {
                    cval = std::stod(gen_args.complexity);
                } catch (const std::exception&) {
                    std::cerr << "error: --complexity expects \"lognormal\" or "
                                 "a number\n";
                    return kUsage;
                }
            }
            for (int i = 0; i < gen_args.count; ++i) {
                uint64_t gs = root.next();
                AppGraph skel = gen_series_parallel(gen_args.edges, gs);
                AppGraph out;
                if (gen_args.skeleton) {
                    out = std::move(skel);
                } else {
                    Rng attr_rng(gs ^ 0x9e3779b97f4a7c15ULL);
                    AttrsSampler sampler =
                        constant ? constant_complexity_sampler(attr_rng, cval)
                                 : default_sampler(attr_rng);
                    out = expand_tasks(skel, sampler, gen_args.source_bytes);
                    if (gen_args.load > 0.0) set_uniform_load(out, gen_args.load);
                }
                std::string path = gen_args.output;
                if (gen_args.count > 1) {
                    size_t dot = path.rfind('.');
                    std::string stem =
                        dot == std::string::npos ? path : path.substr(0, dot);
                    std::string ext =
                        dot == std::string::npos ? "" : path.substr(dot);
                    path = stem + "_" + std::to_string(i) + ext;
                }
                write_text_file(path, graph_to_json(out));
                std::cout << "wrote " << path << "\n";
            }
            return kOk;
        }

        if (*ev) {
            AppGraph g = load_graph(eval_args.graph);
            Platform pf = resolve_platform(eval_args.platform);
            TimingModel tm = load_timing(eval_args.timing);
            Mapping m = load_mapping(g, pf, eval_args.mapping);
            EvalOptions opt;
            opt.bus_overlap = eval_args.overlap;
            opt.streaming = eval_args.streaming;
            EvalResult res = evaluate(g, pf, tm, m, opt);
            if (!eval_args.timeline.empty()) {
                write_text_file(eval_args.timeline,
                                timeline_to_json(res.timeline, res.makespan));
                std::cout << "timeline written to " << eval_args.timeline
                          << "\n";
            }
            if (is_inf(res.makespan)) {
                std::cout << "makespan inf\n";
                std::cerr << "error: " << res.timeline.note << "\n";
                return kInfeasible;
            }
            std::cout << "makespan " << num17(res.makespan) << "\n";
            return kOk;
        }

        if (*so) {
            AppGraph g = load_graph(solve_model.graph);
            Platform pf = resolve_platform(solve_model.platform);
            TimingModel tm = load_timing(solve_model.timing);
            Formulation form = formulation_from_name(solve_model.formulation);
            SolverOptions opts;
            opts.time_limit = solve_args.time_limit;
            opts.gap = solve_args.gap;
            opts.node_limit = solve_args.node_limit;
            opts.enum_budget = solve_args.enum_budget;

            Solution sol;
            Mapping mapping;
            bool have_mapping = false;
            if (solve_args.mode == "exhaustive") {
                try {
                    std::tie(sol, mapping) =
                        solve_exhaustive(g, pf, tm, form, opts);
                } catch (const error& e) {
                    std::cerr << "error: " << e.what() << "\n";
                    return kInfeasible; // enumeration budget exceeded
                }
                have_mapping = sol.status == Solution::Status::Optimal;
            } else {
                auto [model, maps] = build_model(g, pf, tm, solve_model);
                try {
                    if (solve_args.mode == "external") {
                        sol = solve_external(model);
                    } else {
                        BnbContext ctx{&g, &pf, &tm, &maps};
                        sol = solve_bnb(model, opts, ctx);
                    }
                } catch (const error& e) {
                    std::cerr << "error: " << e.what() << "\n";
                    return kInfeasible; // external solver / relaxation failure
                }
                if (!sol.values.empty() &&
                    sol.status != Solution::Status::Infeasible &&
                    sol.status != Solution::Status::Unbounded) {
                    mapping = extract_mapping(sol, maps);
                    have_mapping = true;
                }
            }

            std::cout << "status " << status_name(sol.status) << "\n";
            if (!sol.note.empty()) std::cout << "note " << sol.note << "\n";
            if (!have_mapping) {
                std::cerr << "error: no mapping found\n";
                return kInfeasible;
            }
            std::cout << "objective " << num17(sol.objective) << "\n";
            EvalOptions eo;
            eo.streaming = form == Formulation::TimeStreaming;
            EvalResult res = evaluate(g, pf, tm, mapping, eo);
            std::cout << "makespan " << num17(res.makespan) << "\n";
            if (!solve_args.output.empty()) {
                write_text_file(solve_args.output, mapping_to_json(mapping));
                std::cout << "mapping written to " << solve_args.output << "\n";
            }
            if (!solve_args.timeline.empty()) {
                write_text_file(solve_args.timeline,
                                timeline_to_json(res.timeline, res.makespan));
                std::cout << "timeline written to " << solve_args.timeline
                          << "\n";
            }
            return kOk;
        }

        if (*xl) {
            AppGraph g = load_graph(lp_model.graph);
            Platform pf = resolve_platform(lp_model.platform);
            TimingModel tm = load_timing(lp_model.timing);
            auto [model, maps] = build_model(g, pf, tm, lp_model);
            (void)maps;
            export_lp(model, lp_output);
            std::cout << "wrote " << lp_output << "\n";
            return kOk;
        }

        if (*sl) {
            MilpModel model = read_lp_file(sl_args.model);
            SolverOptions opts;
            opts.time_limit = sl_args.time_limit;
            opts.gap = sl_args.gap;
            opts.node_limit = sl_args.node_limit;
            Solution sol = solve_bnb(model, opts);
            std::cout << "status " << status_name(sol.status) << "\n";
            if (sol.status == Solution::Status::Infeasible ||
                sol.status == Solution::Status::Unbounded ||
                sol.values.empty()) {
                std::cerr << "error: no solution found\n";
                return kInfeasible;
            }
            std::cout << "objective " << num17(sol.objective) << "\n";
            export_solution(sol, model, sl_args.output);
            std::cout << "solution written to " << sl_args.output << "\n";
            return kOk;
        }

        if (*ex) {
            ExperimentConfig config;
            if (!ex_args.config.empty())
                config = config_from_json(read_text_file(ex_args.config));
            if (!ex_args.platform.empty()) config.platform = ex_args.platform;
            if (ex_args.edges > 0) config.edges = ex_args.edges;
            if (ex_args.count > 0) config.count = ex_args.count;
            if (ex_args.seed >= 0)
                config.seed = static_cast<uint64_t>(ex_args.seed);
            if (!ex_args.strategies.empty()) {
                config.strategies.clear();
                for (const std::string& s : ex_args.strategies)
                    config.strategies.push_back(formulation_from_name(s));
            }
            if (!ex_args.mode.empty()) {
                config.mode = ex_args.mode == "bnb"
                                  ? ExperimentConfig::Mode::Bnb
                                  : ex_args.mode == "exhaustive"
                                        ? ExperimentConfig::Mode::Exhaustive
                                        : ExperimentConfig::Mode::External;
            }
            if (!ex_args.complexity.empty()) {
                if (ex_args.complexity == "lognormal") {
                    config.constant_complexity = false;
                } else {
                    config.constant_complexity = true;
                    config.complexity_value = std::stod(ex_args.complexity);
                }
            }
            if (ex_args.node_limit != -2)
                config.solver.node_limit = ex_args.node_limit;
            if (ex_args.time_limit >= 0.0)
                config.solver.time_limit = ex_args.time_limit;
            if (ex_args.overlap) config.bus_overlap = true;
            if (ex_args.no_timings) config.include_timings = false;
            if (ex_args.threads > 0) config.threads = ex_args.threads;

            ExperimentReport report = run_experiment(config);
            write_text_file(ex_args.output + ".csv", report_csv(report));
            write_text_file(ex_args.output + ".json", report_json(report));
            for (const ExperimentAggregate& a : report.aggregates) {
                std::printf(
                    "%s: improved %d/%d, pct avg %.2f min %.2f max %.2f, "
                    "failures %d\n",
                    a.strategy.c_str(), a.improved, a.count, a.avg_pct,
                    a.min_pct, a.max_pct, a.failures);
            }
            std::cout << "report written to " << ex_args.output << ".csv and "
                      << ex_args.output << ".json\n";
            return kOk;
        }

        if (*rd) {
            if (rd_args.dot.empty() && rd_args.gantt.empty()) {
                std::cerr << "error: render needs --dot and/or --gantt\n";
                return kUsage;
            }
            if (!rd_args.dot.empty()) {
                if (rd_args.graph.empty()) {
                    std::cerr << "error: --dot needs a graph\n";
                    return kUsage;
                }
                AppGraph g = load_graph(rd_args.graph);
                std::optional<Mapping> m;
                if (!rd_args.mapping.empty()) {
                    Platform pf = resolve_platform(rd_args.platform);
                    m = load_mapping(g, pf, rd_args.mapping);
                }
                write_text_file(rd_args.dot,
                                render_dot(g, m ? &*m : nullptr));
                std::cout << "wrote " << rd_args.dot << "\n";
            }
            if (!rd_args.gantt.empty()) {
                Timeline tl;
                double makespan = 0.0;
                if (!rd_args.timeline.empty()) {
                    std::tie(tl, makespan) =
                        timeline_from_json(read_text_file(rd_args.timeline));
                } else {
                    if (rd_args.graph.empty() || rd_args.mapping.empty()) {
                        std::cerr << "error: --gantt needs --timeline or a "
                                     "graph with --mapping\n";
                        return kUsage;
                    }
                    AppGraph g = load_graph(rd_args.graph);
                    Platform pf = resolve_platform(rd_args.platform);
                    Mapping m = load_mapping(g, pf, rd_args.mapping);
                    EvalOptions opt;
                    opt.bus_overlap = rd_args.overlap;
                    opt.streaming = rd_args.streaming;
                    EvalResult res = evaluate(g, pf, TimingModel{}, m, opt);
                    tl = std::move(res.timeline);
                    makespan = res.makespan;
                }
                write_text_file(rd_args.gantt, render_gantt(tl, makespan));
                std::cout << "wrote " << rd_args.gantt << "\n";
            }
            return kOk;
        }
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kUsage;
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hetmap/evaluator.hpp"
#include "hetmap/experiment.hpp"
#include "hetmap/lpformat.hpp"
#include "hetmap/milp.hpp"
#include "hetmap/render.hpp"
#include "hetmap/serialize.hpp"
#include "hetmap/solver.hpp"

namespace py = pybind11;
using namespace hetmap;

namespace {

AppGraph graph_of(const std::string& graph_json) {
    AppGraph g = graph_from_json(graph_json);
    std::vector<Violation> violations = validate(g);
    if (!violations.empty()) {
        std::string msg = "invalid graph:";
        for (const Violation& v : violations) msg += "\n  " + v.message;
        throw error(msg);
    }
    return g;
}

TimingModel timing_of(const std::string& timing_json) {
    if (timing_json.empty()) return TimingModel{};
    return timing_from_json(timing_json);
}

Mapping mapping_of(const AppGraph& g, const Platform& pf,
                   const std::string& mapping_json) {
    if (mapping_json == "all-cpu") return all_cpu_mapping(g, pf);
    return mapping_from_json(mapping_json);
}

std::pair<MilpModel, BuildMaps> model_of(const AppGraph& g, const Platform& pf,
                                         const TimingModel& tm,
                                         const std::string& formulation) {
    Formulation form = formulation_from_name(formulation);
    if (form == Formulation::Device) return build_device_based(g, pf, tm);
    auto built = build_time_based(g, pf, tm, topsort_bfs(g));
    if (form == Formulation::TimeStreaming)
        add_streaming_extension(built.first, built.second, g, pf, tm);
    return built;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "task mapping on heterogeneous platforms (JSON-string API)";

    py::register_exception<error>(m, "HetmapError");

    m.def("generate", [](int edges, uint64_t seed, bool skeleton,
                         double source_bytes, double load) {
        AppGraph skel = gen_series_parallel(edges, seed);
        if (skeleton) return graph_to_json(skel);
        Rng attr_rng(seed ^ 0x9e3779b97f4a7c15ULL);
        AttrsSampler sampler = default_sampler(attr_rng);
        AppGraph g = expand_tasks(skel, sampler, source_bytes);
        if (load > 0.0) set_uniform_load(g, load);
        return graph_to_json(g);
    }, py::arg("edges") = 30, py::arg("seed") = 1, py::arg("skeleton") = false,
       py::arg("source_bytes") = 100e6, py::arg("load") = 100e6);

    m.def("validate_graph", [](const std::string& graph_json) {
        AppGraph g = graph_from_json(graph_json);
        std::vector<std::string> out;
        for (const Violation& v : validate(g)) out.push_back(v.message);
        return out;
    }, py::arg("graph_json"));

    m.def("preset_platform", [](const std::string& name) {
        return platform_to_json(preset(name));
    }, py::arg("name"));

    m.def("evaluate", [](const std::string& graph_json,
                         const std::string& platform,
                         const std::string& mapping_json, bool bus_overlap,
                         bool streaming, const std::string& timing_json) {
        AppGraph g = graph_of(graph_json);
        Platform pf = resolve_platform(platform);
        TimingModel tm = timing_of(timing_json);
        Mapping map = mapping_of(g, pf, mapping_json);
        EvalOptions opt;
        opt.bus_overlap = bus_overlap;
        opt.streaming = streaming;
        EvalResult res = evaluate(g, pf, tm, map, opt);
        return timeline_to_json(res.timeline, res.makespan);
    }, py::arg("graph_json"), py::arg("platform") = "CG",
       py::arg("mapping_json") = "all-cpu", py::arg("bus_overlap") = false,
       py::arg("streaming") = false, py::arg("timing_json") = "");

    m.def("solve", [](const std::string& graph_json,
                      const std::string& platform,
                      const std::string& formulation, const std::string& mode,
                      double time_limit, double gap, long node_limit,
                      long enum_budget, const std::string& timing_json) {
        AppGraph g = graph_of(graph_json);
        Platform pf = resolve_platform(platform);
        TimingModel tm = timing_of(timing_json);
        SolverOptions opts;
        opts.time_limit = time_limit;
        opts.gap = gap;
        opts.node_limit = node_limit;
        opts.enum_budget = enum_budget;

        Solution sol;
        Mapping mapping;
        bool have_mapping = false;
        if (mode == "exhaustive") {
            Formulation form = formulation_from_name(formulation);
            std::tie(sol, mapping) = solve_exhaustive(g, pf, tm, form, opts);
            have_mapping = sol.status == Solution::Status::Optimal;
        } else if (mode == "bnb") {
            auto [model, maps] = model_of(g, pf, tm, formulation);
            BnbContext ctx{&g, &pf, &tm, &maps};
            sol = solve_bnb(model, opts, ctx);
            if (!sol.values.empty() &&
                sol.status != Solution::Status::Infeasible &&
                sol.status != Solution::Status::Unbounded) {
                mapping = extract_mapping(sol, maps);
                have_mapping = true;
            }
        } else {
            throw error("unknown mode: " + mode);
        }

        std::string mapping_json =
            have_mapping ? mapping_to_json(mapping) : std::string();
        return py::make_tuple(status_name(sol.status), sol.objective,
                              mapping_json, sol.nodes_explored, sol.note);
    }, py::arg("graph_json"), py::arg("platform") = "CG",
       py::arg("formulation") = "device", py::arg("mode") = "bnb",
       py::arg("time_limit") = 60.0, py::arg("gap") = 1e-6,
       py::arg("node_limit") = -1, py::arg("enum_budget") = 10000000,
       py::arg("timing_json") = "");

    m.def("export_lp", [](const std::string& graph_json,
                          const std::string& platform,
                          const std::string& formulation,
                          const std::string& timing_json) {
        AppGraph g = graph_of(graph_json);
        Platform pf = resolve_platform(platform);
        TimingModel tm = timing_of(timing_json);
        auto [model, maps] = model_of(g, pf, tm, formulation);
        (void)maps;
        return export_lp(model);
    }, py::arg("graph_json"), py::arg("platform") = "CG",
       py::arg("formulation") = "device", py::arg("timing_json") = "");

    m.def("render_dot", [](const std::string& graph_json,
                           const std::string& mapping_json) {
        AppGraph g = graph_of(graph_json);
        if (mapping_json.empty()) return render_dot(g);
        Mapping map = mapping_from_json(mapping_json);
        return render_dot(g, &map);
    }, py::arg("graph_json"), py::arg("mapping_json") = "");

    m.def("render_gantt", [](const std::string& timeline_json) {
        auto [tl, makespan] = timeline_from_json(timeline_json);
        return render_gantt(tl, makespan);
    }, py::arg("timeline_json"));

    m.def("run_experiment", [](const std::string& config_json) {
        ExperimentReport report = run_experiment(config_from_json(config_json));
        return py::make_tuple(report_json(report), report_csv(report));
    }, py::arg("config_json"));
}

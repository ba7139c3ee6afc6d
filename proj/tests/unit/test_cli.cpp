#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "hetmap/evaluator.hpp"
#include "hetmap/experiment.hpp"
#include "hetmap/lpformat.hpp"
#include "hetmap/milp.hpp"
#include "hetmap/serialize.hpp"
#include "hetmap/solver.hpp"
#include "hetmap/timing.hpp"

using namespace hetmap;
using namespace testutil;

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int code = -1;
    std::string out; // stdout and stderr combined
};

std::string cli_bin() {
    const char* bin = std::getenv("HETMAP_BIN");
    REQUIRE_MESSAGE((bin != nullptr && *bin),
                    "HETMAP_BIN must point at the hetmap binary");
    return bin;
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + cli_bin() + " " + args +
                      " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    char buf[512];
    size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        res.out.append(buf, got);
    int status = ::pclose(pipe);
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

// value following "<key> " on its own line of CLI output
double parse_value(const std::string& out, const std::string& key) {
    size_t pos = out.find(key + " ");
    REQUIRE_MESSAGE(pos != std::string::npos, key, " not in output:\n", out);
    REQUIRE((pos == 0 || out[pos - 1] == '\n'));
    return std::stod(out.substr(pos + key.size() + 1));
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("hetmap_cli_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

} // namespace

TEST_CASE("cli rejects unknown usage up front") {
    CHECK(run_cli("").code == 1);
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("frobnicate").code == 1);
    CHECK(run_cli("gen --edges 4").code == 1); // missing required -o
    CHECK(run_cli("solve g.json -f magic").code == 1);
}

TEST_CASE("gen writes graphs, numbered batches, and skeletons") {
    TempDir dir("gen");
    std::string g1 = dir.file("g.json");

    RunResult r = run_cli("gen -m 4 -s 8 -o " + g1);
    CHECK(r.code == 0);
    CHECK(r.out.find("wrote " + g1) != std::string::npos);
    AppGraph g = graph_from_json(read_text_file(g1));
    CHECK(validate(g).empty());
    CHECK(g.nodes.size() > 2);

    // a batch starts from the same seed chain: first file matches the single
    RunResult rb = run_cli("gen -m 4 -s 8 -n 2 -o " + dir.file("b.json"));
    CHECK(rb.code == 0);
    CHECK(read_text_file(dir.file("b_0.json")) == read_text_file(g1));
    CHECK(fs::exists(dir.file("b_1.json")));

    RunResult rs = run_cli("gen -m 4 -s 8 --skeleton -o " + dir.file("s.json"));
    CHECK(rs.code == 0);
    AppGraph skel = graph_from_json(read_text_file(dir.file("s.json")));
    for (const Node& n : skel.nodes)
        CHECK((n.kind == NodeKind::Source || n.kind == NodeKind::Sink ||
               n.kind == NodeKind::Compute));

    RunResult rc = run_cli("gen -m 4 -s 8 --complexity 2.5 -o " +
                           dir.file("c.json"));
    CHECK(rc.code == 0);
    AppGraph cg = graph_from_json(read_text_file(dir.file("c.json")));
    for (const Node& n : cg.nodes)
        if (n.kind == NodeKind::Compute) CHECK(n.attrs->complexity == 2.5);

    CHECK(run_cli("gen --complexity wild -o " + dir.file("w.json")).code == 1);
}

TEST_CASE("eval prints the makespan and uses documented exit codes") {
    TempDir dir("eval");
    std::string gpath = dir.file("g.json");
    REQUIRE(run_cli("gen -m 4 -s 8 -o " + gpath).code == 0);
    AppGraph g = graph_from_json(read_text_file(gpath));

    SUBCASE("all-cpu baseline on the default platform") {
        RunResult r = run_cli("eval " + gpath);
        CHECK(r.code == 0);
        Platform pf = preset("CG");
        double expect =
            evaluate(g, pf, TimingModel{}, all_cpu_mapping(g, pf)).makespan;
        CHECK(parse_value(r.out, "makespan") == expect);
    }

    SUBCASE("explicit mapping file and timeline output") {
        Platform pf = hand_platform();
        std::string pfpath = dir.file("pf.json");
        write_text_file(pfpath, platform_to_json(pf));
        Mapping m = uniform_mapping(g, "p1", "m1");
        write_text_file(dir.file("m.json"), mapping_to_json(m));
        std::string tlpath = dir.file("tl.json");

        RunResult r = run_cli("eval " + gpath + " -p " + pfpath +
                              " --mapping " + dir.file("m.json") +
                              " --timeline " + tlpath);
        CHECK(r.code == 0);
        EvalResult expect = evaluate(g, pf, TimingModel{}, m);
        CHECK(parse_value(r.out, "makespan") == expect.makespan);
        CHECK(read_text_file(tlpath) ==
              timeline_to_json(expect.timeline, expect.makespan));
    }

    SUBCASE("data errors exit 2") {
        CHECK(run_cli("eval " + dir.file("absent.json")).code == 2);
        write_text_file(dir.file("broken.json"), "{}");
        RunResult r = run_cli("eval " + dir.file("broken.json"));
        CHECK(r.code == 2);
        CHECK(r.out.find("error:") != std::string::npos);
    }

    SUBCASE("unreachable routes exit 3") {
        Platform pf = hand_platform(true, false); // no m1-m2 link
        write_text_file(dir.file("pf.json"), platform_to_json(pf));
        Mapping m = uniform_mapping(g, "p1", "m1");
        m.at[0] = "m2";
        write_text_file(dir.file("m.json"), mapping_to_json(m));
        RunResult r = run_cli("eval " + gpath + " -p " + dir.file("pf.json") +
                              " --mapping " + dir.file("m.json"));
        CHECK(r.code == 3);
        CHECK(r.out.find("makespan inf") != std::string::npos);
        CHECK(r.out.find("infinite time on edge") != std::string::npos);
    }
}

TEST_CASE("solve agrees with the library across modes") {
    TempDir dir("solve");
    std::string gpath = dir.file("g.json");
    REQUIRE(run_cli("gen -m 4 -s 8 -o " + gpath).code == 0);
    AppGraph g = graph_from_json(read_text_file(gpath));
    Platform pf = preset("CG");
    TimingModel tm;

    SUBCASE("device formulation writes mapping and timeline") {
        std::string mpath = dir.file("m.json"), tpath = dir.file("tl.json");
        RunResult r = run_cli("solve " + gpath + " -f device -o " + mpath +
                              " --timeline " + tpath);
        CHECK(r.code == 0);
        CHECK(r.out.find("status optimal") != std::string::npos);

        Mapping m = mapping_from_json(read_text_file(mpath));
        TimingView view(g, pf, tm);
        std::vector<int> units(g.nodes.size());
        for (const auto& [node, unit] : m.at)
            units[node] = view.unit_index(unit);
        CHECK(parse_value(r.out, "objective") ==
              doctest::Approx(device_objective(view, units)).epsilon(1e-9));

        EvalResult ev = evaluate(g, pf, tm, m);
        CHECK(parse_value(r.out, "makespan") == ev.makespan);
        CHECK(read_text_file(tpath) ==
              timeline_to_json(ev.timeline, ev.makespan));
    }

    SUBCASE("bnb and exhaustive find the same optimum") {
        RunResult bnb = run_cli("solve " + gpath + " -f device");
        RunResult exh = run_cli("solve " + gpath + " -f device "
                                "--mode exhaustive");
        CHECK(bnb.code == 0);
        CHECK(exh.code == 0);
        CHECK(parse_value(bnb.out, "objective") ==
              doctest::Approx(parse_value(exh.out, "objective"))
                  .epsilon(1e-9));
    }

    SUBCASE("the time formulation respects the pair options") {
        RunResult r = run_cli("solve " + gpath +
                              " -f time --pairs path-pruned --scope proc-only");
        CHECK(r.code == 0);
        CHECK(r.out.find("status optimal") != std::string::npos);
        CHECK(parse_value(r.out, "makespan") > 0.0);
    }

    SUBCASE("an impossible instance exits 3") {
        AppGraph one = single_task(1.0, attrs(2.0));
        write_text_file(dir.file("one.json"), graph_to_json(one));
        write_text_file(dir.file("pf.json"),
                        platform_to_json(hand_platform(true, false)));
        TimingModel rules;
        rules.rules.allow[0] = {"m2"};
        rules.rules.allow[1] = {"m1"};
        write_text_file(dir.file("tm.json"), timing_to_json(rules));
        RunResult r = run_cli("solve " + dir.file("one.json") + " -p " +
                              dir.file("pf.json") + " --timing " +
                              dir.file("tm.json") + " -f device");
        CHECK(r.code == 3);
        CHECK(r.out.find("status infeasible") != std::string::npos);
        CHECK(r.out.find("error: no mapping found") != std::string::npos);
    }
}

TEST_CASE("export-lp, solve-lp, and the external mode line up") {
    TempDir dir("lp");
    std::string gpath = dir.file("g.json");
    REQUIRE(run_cli("gen -m 4 -s 8 -o " + gpath).code == 0);
    std::string lppath = dir.file("model.lp"), solpath = dir.file("model.sol");

    RunResult rx = run_cli("export-lp " + gpath + " -f device -o " + lppath);
    CHECK(rx.code == 0);
    MilpModel model = read_lp_file(lppath);
    Solution lib = solve_bnb(model, SolverOptions{});
    REQUIRE(lib.status == Solution::Status::Optimal);

    RunResult rs = run_cli("solve-lp " + lppath + " -o " + solpath);
    CHECK(rs.code == 0);
    CHECK(rs.out.find("status optimal") != std::string::npos);
    CHECK(parse_value(rs.out, "objective") ==
          doctest::Approx(lib.objective).epsilon(1e-9));
    Solution imported = import_solution_file(solpath, model);
    CHECK(imported.status != Solution::Status::Infeasible);
    CHECK(model.objective_value(imported.values) ==
          doctest::Approx(lib.objective).epsilon(1e-9));

    SUBCASE("external mode routes through the command template") {
        std::string env = "HETMAP_EXTERNAL_SOLVER='" + cli_bin() +
                          " solve-lp {lp} -o {sol}'";
        RunResult ext = run_cli("solve " + gpath + " -f device "
                                "--mode external", env);
        RunResult bnb = run_cli("solve " + gpath + " -f device");
        CHECK(ext.code == 0);
        CHECK(parse_value(ext.out, "objective") ==
              doctest::Approx(parse_value(bnb.out, "objective"))
                  .epsilon(1e-9));
        CHECK(parse_value(ext.out, "makespan") ==
              doctest::Approx(parse_value(bnb.out, "makespan"))
                  .epsilon(1e-9));
    }

    SUBCASE("a failing external command exits 3") {
        RunResult r = run_cli("solve " + gpath + " -f device --mode external",
                              "HETMAP_EXTERNAL_SOLVER='false'");
        CHECK(r.code == 3);
        CHECK(r.out.find("external solver command failed") !=
              std::string::npos);
    }

    SUBCASE("solve-lp reports infeasible models") {
        std::string bad = dir.file("bad.lp");
        write_text_file(bad, "Minimize\n obj: x\nSubject To\n c0: x >= 2\n"
                             "Bounds\n x <= 1\nEnd\n");
        RunResult r = run_cli("solve-lp " + bad + " -o " + dir.file("b.sol"));
        CHECK(r.code == 3);
        CHECK(r.out.find("status infeasible") != std::string::npos);
    }

    CHECK(run_cli("solve-lp " + dir.file("nope.lp") + " -o x.sol").code == 2);
}

TEST_CASE("render writes dot and gantt artifacts") {
    TempDir dir("render");
    std::string gpath = dir.file("g.json");
    REQUIRE(run_cli("gen -m 4 -s 8 -o " + gpath).code == 0);

    RunResult rd = run_cli("render " + gpath + " --dot " + dir.file("g.dot"));
    CHECK(rd.code == 0);
    CHECK(read_text_file(dir.file("g.dot")).rfind("digraph app {", 0) == 0);

    RunResult rg = run_cli("render " + gpath + " --mapping all-cpu --gantt " +
                           dir.file("g.svg"));
    CHECK(rg.code == 0);
    CHECK(read_text_file(dir.file("g.svg")).rfind("<svg", 0) == 0);

    // gantt from a timeline file written by eval
    REQUIRE(run_cli("eval " + gpath + " --timeline " + dir.file("tl.json"))
                .code == 0);
    RunResult rt = run_cli("render --timeline " + dir.file("tl.json") +
                           " --gantt " + dir.file("t.svg"));
    CHECK(rt.code == 0);
    CHECK(read_text_file(dir.file("t.svg")).rfind("<svg", 0) == 0);

    CHECK(run_cli("render " + gpath).code == 1);
    CHECK(run_cli("render --gantt " + dir.file("x.svg")).code == 1);
}

TEST_CASE("experiment emits csv and json reports") {
    TempDir dir("exp");
    std::string stem = dir.file("rep");
    RunResult r = run_cli("experiment -m 4 -n 2 -s 8 --strategies device "
                          "--no-timings -o " + stem);
    CHECK(r.code == 0);
    CHECK(r.out.find("device: improved") != std::string::npos);
    CHECK(r.out.find("report written to") != std::string::npos);

    std::string csv = read_text_file(stem + ".csv");
    CHECK(csv.rfind("seed,nodes,edges,baseline_s,strategy,makespan_s,"
                    "pct_change,status,solve_s\n", 0) == 0);
    CHECK(read_text_file(stem + ".json").find("\"aggregates\"") !=
          std::string::npos);

    // byte-stable across runs once timings are omitted
    std::string stem2 = dir.file("rep2");
    REQUIRE(run_cli("experiment -m 4 -n 2 -s 8 --strategies device "
                    "--no-timings -o " + stem2).code == 0);
    CHECK(read_text_file(stem2 + ".csv") == csv);

    // a config file provides the same defaults as the flags
    ExperimentConfig cfg;
    cfg.edges = 4;
    cfg.count = 2;
    cfg.seed = 8;
    cfg.strategies = {Formulation::Device};
    cfg.include_timings = false;
    write_text_file(dir.file("cfg.json"), config_to_json(cfg));
    std::string stem3 = dir.file("rep3");
    REQUIRE(run_cli("experiment --config " + dir.file("cfg.json") + " -o " +
                    stem3).code == 0);
    CHECK(read_text_file(stem3 + ".csv") == csv);
}

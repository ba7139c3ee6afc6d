#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "hetmap/experiment.hpp"
#include "hetmap/lpformat.hpp"
#include "hetmap/serialize.hpp"

using namespace hetmap;
using namespace testutil;

TEST_CASE("resolve_platform accepts presets and JSON files") {
    CHECK(resolve_platform("CG") == preset("CG"));
    CHECK(resolve_platform("CGF") == preset("CGF"));
    CHECK(resolve_platform("CGFF") == preset("CGFF"));

    Platform pf = hand_platform();
    std::string path =
        (std::filesystem::temp_directory_path() / "hetmap_pf_test.json")
            .string();
    write_text_file(path, platform_to_json(pf));
    CHECK(resolve_platform(path) == pf);
    std::filesystem::remove(path);

    CHECK_THROWS_WITH_AS(resolve_platform("/nonexistent/platform.json"),
                         doctest::Contains("cannot open"), error);
}

TEST_CASE("small experiment runs produce consistent rows and aggregates") {
    ExperimentConfig cfg;
    cfg.platform = "CG";
    cfg.edges = 4;
    cfg.count = 4;
    cfg.seed = 8; // every sampled skeleton has at least one task
    cfg.strategies = {Formulation::Device, Formulation::Time};
    cfg.solver.time_limit = 30.0;

    ExperimentReport rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 8);
    REQUIRE(rep.aggregates.size() == 2);

    for (size_t i = 0; i < rep.rows.size(); ++i) {
        const ExperimentRow& row = rep.rows[i];
        // graph-major layout, strategies in configured order within each graph
        CHECK(row.strategy == (i % 2 == 0 ? "device" : "time"));
        CHECK(row.nodes > 0);
        CHECK(row.edges > 0);
        CHECK(row.baseline_s > 0.0);
        CHECK(row.ok);
        CHECK(row.status == "optimal");
        CHECK(row.makespan_s > 0.0);
        CHECK(close(row.pct_change,
                    (row.baseline_s - row.makespan_s) / row.baseline_s * 100.0,
                    1e-9));
        CHECK(row.same_unit_frac >= 0.0);
        CHECK(row.same_unit_frac <= 1.0);
    }
    // both strategies saw the same four graphs
    for (int gi = 0; gi < 4; ++gi) {
        CHECK(rep.rows[gi * 2].graph_seed == rep.rows[gi * 2 + 1].graph_seed);
        CHECK(rep.rows[gi * 2].baseline_s == rep.rows[gi * 2 + 1].baseline_s);
    }

    for (size_t si = 0; si < rep.aggregates.size(); ++si) {
        const ExperimentAggregate& agg = rep.aggregates[si];
        CHECK(agg.strategy == (si == 0 ? "device" : "time"));
        CHECK(agg.count == 4);
        CHECK(agg.successes + agg.failures == agg.count);
        double sum = 0.0;
        int improved = 0;
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (int gi = 0; gi < 4; ++gi) {
            const ExperimentRow& row = rep.rows[gi * 2 + si];
            if (!row.ok) continue;
            sum += row.pct_change;
            if (row.pct_change > 0.0) ++improved;
            if (first || row.pct_change < lo) lo = row.pct_change;
            if (first || row.pct_change > hi) hi = row.pct_change;
            first = false;
        }
        CHECK(agg.improved == improved);
        CHECK(close(agg.avg_pct, sum / agg.successes, 1e-12));
        CHECK(agg.min_pct == lo);
        CHECK(agg.max_pct == hi);
    }
}

TEST_CASE("taskless skeletons yield zero baselines without failing") {
    // parallel bundles can collapse in deduplication, leaving source->sink
    ExperimentConfig cfg;
    cfg.edges = 3;
    cfg.count = 1;
    cfg.seed = 123;
    cfg.strategies = {Formulation::Device};

    ExperimentReport rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 1);
    const ExperimentRow& row = rep.rows[0];
    CHECK(row.nodes == 2);
    CHECK(row.baseline_s == 0.0);
    CHECK(row.ok);
    CHECK(row.status == "optimal");
    CHECK(row.makespan_s == 0.0);
    CHECK(row.pct_change == 0.0);
}

TEST_CASE("reports are deterministic when timings are excluded") {
    ExperimentConfig cfg;
    cfg.edges = 2;
    cfg.count = 3;
    cfg.seed = 9;
    cfg.strategies = {Formulation::Device};
    cfg.include_timings = false;

    ExperimentReport a = run_experiment(cfg);
    ExperimentReport b = run_experiment(cfg);
    CHECK(report_csv(a) == report_csv(b));
    CHECK(report_json(a) == report_json(b));
}

TEST_CASE("csv reports carry the documented header and one line per row") {
    ExperimentConfig cfg;
    cfg.edges = 2;
    cfg.count = 2;
    cfg.seed = 5;
    cfg.strategies = {Formulation::Time};

    ExperimentReport rep = run_experiment(cfg);
    std::string csv = report_csv(rep);
    std::string header =
        "seed,nodes,edges,baseline_s,strategy,makespan_s,pct_change,status,"
        "solve_s\n";
    REQUIRE(csv.rfind(header, 0) == 0);

    std::vector<std::string> lines;
    for (size_t pos = 0; pos < csv.size();) {
        size_t nl = csv.find('\n', pos);
        lines.push_back(csv.substr(pos, nl - pos));
        pos = nl + 1;
    }
    REQUIRE(lines.size() == rep.rows.size() + 1);
    for (const std::string& line : lines) {
        int commas = 0;
        for (char c : line)
            if (c == ',') ++commas;
        CHECK(commas == 8);
    }
    CHECK(lines[1].find(std::to_string(rep.rows[0].graph_seed) + ",") == 0);
    CHECK(lines[1].find(",time,") != std::string::npos);
    CHECK(lines[1].find(",optimal,") != std::string::npos);
}

TEST_CASE("exhaustive mode solves tiny instances") {
    ExperimentConfig cfg;
    cfg.edges = 1;
    cfg.count = 1;
    cfg.seed = 77;
    cfg.strategies = {Formulation::Device, Formulation::Time};
    cfg.mode = ExperimentConfig::Mode::Exhaustive;

    ExperimentReport rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 2);
    for (const ExperimentRow& row : rep.rows) {
        CHECK(row.ok);
        CHECK(row.status == "optimal");
    }
}

TEST_CASE("experiment config JSON round trips every field") {
    ExperimentConfig c;
    c.platform = "CGF";
    c.edges = 5;
    c.count = 7;
    c.seed = 42;
    c.source_bytes = 1e3;
    c.fixed_task_load = false;
    c.task_load_bytes = 2e3;
    c.constant_complexity = true;
    c.complexity_value = 2.5;
    c.strategies = {Formulation::Time, Formulation::TimeStreaming,
                    Formulation::Device};
    c.mode = ExperimentConfig::Mode::External;
    c.solver.time_limit = 12.0;
    c.solver.gap = 1e-4;
    c.solver.node_limit = 99;
    c.solver.enum_budget = 1234.0;
    c.time_model.pairs = TimeOptions::Pairs::All;
    c.time_model.scope = TimeOptions::OrderingScope::AllUnits;
    c.bus_overlap = true;
    c.include_timings = false;
    c.threads = 3;

    std::string text = config_to_json(c);
    ExperimentConfig back = config_from_json(text);
    CHECK(back.platform == c.platform);
    CHECK(back.edges == c.edges);
    CHECK(back.count == c.count);
    CHECK(back.seed == c.seed);
    CHECK(back.source_bytes == c.source_bytes);
    CHECK(back.fixed_task_load == c.fixed_task_load);
    CHECK(back.task_load_bytes == c.task_load_bytes);
    CHECK(back.constant_complexity);
    CHECK(back.complexity_value == c.complexity_value);
    CHECK(back.strategies == c.strategies);
    CHECK(back.mode == c.mode);
    CHECK(back.solver.time_limit == c.solver.time_limit);
    CHECK(back.solver.gap == c.solver.gap);
    CHECK(back.solver.node_limit == c.solver.node_limit);
    CHECK(back.solver.enum_budget == c.solver.enum_budget);
    CHECK(back.time_model.pairs == c.time_model.pairs);
    CHECK(back.time_model.scope == c.time_model.scope);
    CHECK(back.bus_overlap == c.bus_overlap);
    CHECK(back.include_timings == c.include_timings);
    CHECK(back.threads == c.threads);
    CHECK(config_to_json(back) == text);

    // random complexity spells itself as the distribution name
    ExperimentConfig dflt;
    std::string dtext = config_to_json(dflt);
    CHECK(dtext.find("\"lognormal\"") != std::string::npos);
    ExperimentConfig dback = config_from_json(dtext);
    CHECK(!dback.constant_complexity);
    CHECK(dback.strategies == dflt.strategies);

    CHECK_THROWS_WITH_AS(config_from_json("nope"),
                         doctest::Contains("invalid experiment config"), error);
    CHECK_THROWS_WITH_AS(config_from_json(R"({"mode": "oracle"})"),
                         doctest::Contains("unknown experiment mode"), error);
    CHECK_THROWS_WITH_AS(config_from_json(R"({"complexity": true})"),
                         doctest::Contains("complexity"), error);
    CHECK_THROWS_WITH_AS(
        config_from_json(R"({"time_model": {"pairs": "some"}})"),
        doctest::Contains("unknown pairs option"), error);
    CHECK_THROWS_WITH_AS(
        config_from_json(R"({"time_model": {"scope": "some"}})"),
        doctest::Contains("unknown scope option"), error);
        CHECK_THROWS_WITH_AS(config_from_json(R"({"strategies": ["magic"]})"),
                         doctest::Contains("unknown formulation"), error);
}

TEST_CASE("invalid experiment configs are rejected up front") {
    ExperimentConfig cfg;
    cfg.count = 0;
    CHECK_THROWS_WITH_AS(run_experiment(cfg),
                         doctest::Contains("count must be >= 1"), error);
    cfg.count = 1;
    cfg.edges = 0;
    CHECK_THROWS_WITH_AS(run_experiment(cfg),
                         doctest::Contains("edges must be >= 1"), error);
    cfg.edges = 1;
    cfg.strategies.clear();
    CHECK_THROWS_WITH_AS(run_experiment(cfg),
                         doctest::Contains("at least one strategy"), error);
}

TEST_CASE("external solving requires the command template") {
    ::unsetenv("HETMAP_EXTERNAL_SOLVER");
    MilpModel m;
    int x = m.add_continuous("x", 0.0, 1.0);
    m.objective.emplace_back(x, 1.0);
    CHECK_THROWS_WITH_AS(solve_external(m),
                         doctest::Contains("HETMAP_EXTERNAL_SOLVER"), error);
}

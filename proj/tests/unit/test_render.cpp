#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "hetmap/evaluator.hpp"
#include "hetmap/render.hpp"

using namespace hetmap;
using namespace testutil;

namespace {

int count_of(const std::string& text, const std::string& needle) {
    int n = 0;
    for (size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

} // namespace

TEST_CASE("dot rendering lists every node and edge") {
    AppGraph g = single_task(1.0, attrs(2.0, 0.5));
    std::string dot = render_dot(g);
    CHECK(dot.rfind("digraph app {", 0) == 0);
    CHECK(dot.find("n0 [shape=invtriangle") != std::string::npos);
    CHECK(dot.find("n1 [shape=box,") != std::string::npos);
    CHECK(dot.find("n2 [shape=ellipse") != std::string::npos);
    CHECK(dot.find("n3 [shape=box3d") != std::string::npos);
    CHECK(dot.find("n4 [shape=triangle") != std::string::npos);
    // compute labels carry parallelizability and complexity
    CHECK(dot.find("t2\\np=0.5 c=2") != std::string::npos);
    for (const auto& [u, v] : g.edges) {
        std::string arrow =
            "n" + std::to_string(u) + " -> n" + std::to_string(v) + ";";
        CHECK(dot.find(arrow) != std::string::npos);
    }
    CHECK(dot.find("style=filled") == std::string::npos);
    CHECK(render_dot(g) == dot);
}

TEST_CASE("dot fills are keyed by assigned unit") {
    AppGraph g = single_task(1.0, attrs(2.0));
    Mapping m = uniform_mapping(g, "p1", "m1");
    std::string dot = render_dot(g, &m);
    // colors assign in unit-name order: m1 first, p1 second
    CHECK(dot.find("n0 [shape=invtriangle, label=\"source 0\", style=filled, "
                   "fillcolor=\"#8dd3c7\", tooltip=\"m1\"]") !=
          std::string::npos);
    CHECK(dot.find("n2 [shape=ellipse, label=\"t2\\np=0 c=2\", style=filled, "
                   "fillcolor=\"#ffffb3\", tooltip=\"p1\"]") !=
          std::string::npos);
    CHECK(render_dot(g, &m) == dot);

    // nodes without an assignment stay unfilled
    Mapping partial;
    partial.at[2] = "p1";
    std::string sparse = render_dot(g, &partial);
    CHECK(count_of(sparse, "style=filled") == 1);
}

TEST_CASE("gantt charts draw one lane per unit and one bar per event") {
    TimingModel tm;
    Platform pf = hand_platform();
    AppGraph g = single_task(4.0, attrs(2.0));
    EvalResult res = evaluate(g, pf, tm, uniform_mapping(g, "p1", "m1"));
    REQUIRE(!res.timeline.events.empty());
    std::string svg = render_gantt(res.timeline, res.makespan);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("</svg>\n") != std::string::npos);
    CHECK(svg.find(">m1</text>") != std::string::npos);
    CHECK(svg.find(">p1</text>") != std::string::npos);
    // background plus one rect per event
    CHECK(count_of(svg, "<rect") ==
          static_cast<int>(res.timeline.events.size()) + 1);
    for (const Event& e : res.timeline.events) {
        std::string title = "node " + std::to_string(e.node) + " " +
                            event_kind_name(e.kind);
        CHECK(svg.find(title) != std::string::npos);
    }
    CHECK(svg.find("#4c78a8") != std::string::npos); // a compute bar exists
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(render_gantt(res.timeline, res.makespan) == svg);
}

TEST_CASE("gantt handles degenerate spans") {
    SUBCASE("empty timeline at makespan zero") {
        Timeline tl;
        std::string svg = render_gantt(tl, 0.0);
        CHECK(svg.find("makespan 0 s") != std::string::npos);
        CHECK(svg.find("nan") == std::string::npos);
        CHECK(svg.find("</svg>") != std::string::npos);
    }
    SUBCASE("infinite makespan is labeled inf") {
        Timeline tl;
        tl.clocks["p1"] = 1.0;
        std::string svg = render_gantt(tl, kInf);
        CHECK(svg.find("makespan inf") != std::string::npos);
        CHECK(svg.find("nan") == std::string::npos);
    }
    SUBCASE("zero-duration events keep a visible sliver") {
        Timeline tl;
        Event e;
        e.node = 7;
        e.unit = "u<1>";
        e.start = 0.5;
        e.end = 0.5;
        e.kind = EventKind::Transfer;
        tl.events.push_back(e);
        std::string svg = render_gantt(tl, 1.0);
        CHECK(svg.find("width=\"0.75\"") != std::string::npos);
        CHECK(svg.find(">u&lt;1&gt;</text>") != std::string::npos);
        CHECK(svg.find("#f58518") != std::string::npos);
    }
}

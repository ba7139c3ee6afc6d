#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "hetmap/lpformat.hpp"
#include "hetmap/milp.hpp"
#include "hetmap/solver.hpp"

using namespace hetmap;
using namespace testutil;

namespace {

// Name-keyed structural view so two models can be compared even when their
// variable ids were assigned in different orders.
struct ModelView {
    std::map<std::string, std::tuple<double, double, MilpVar::Kind>> vars;
    std::map<std::string,
             std::tuple<std::map<std::string, double>, MilpConstraint::Sense,
                        double>>
        cons;
    std::map<std::string, double> objective;
};

ModelView view_of(const MilpModel& m) {
    ModelView v;
    for (const MilpVar& var : m.vars)
        v.vars[var.name] = {var.lo, var.hi, var.kind};
    for (const MilpConstraint& c : m.cons) {
        std::map<std::string, double> terms;
        for (const auto& [var, coeff] : c.terms) {
            terms[m.vars[var].name] += coeff;
            if (terms[m.vars[var].name] == 0.0) terms.erase(m.vars[var].name);
        }
        v.cons[c.name] = {std::move(terms), c.sense, c.rhs};
    }
    for (const auto& [var, coeff] : m.objective)
        if (coeff != 0.0) v.objective[m.vars[var].name] += coeff;
    return v;
}

} // namespace

TEST_CASE("export renders the documented sections in order") {
    TimingModel tm;
    Platform pf = hand_platform();
    AppGraph g = single_task(1.0, attrs(2.0));
    auto [model, maps] = build_device_based(g, pf, tm);
    std::string text = export_lp(model);

    size_t min_at = text.find("Minimize\n");
    size_t st_at = text.find("Subject To\n");
    size_t bnd_at = text.find("Bounds\n");
    size_t bin_at = text.find("Binaries\n");
    size_t end_at = text.find("End\n");
    REQUIRE(min_at != std::string::npos);
    REQUIRE(st_at != std::string::npos);
    REQUIRE(bnd_at != std::string::npos);
    REQUIRE(bin_at != std::string::npos);
    REQUIRE(end_at != std::string::npos);
    CHECK(min_at < st_at);
    CHECK(st_at < bnd_at);
    CHECK(bnd_at < bin_at);
    CHECK(bin_at < end_at);
    CHECK(text.substr(0, 1) == "\\"); // leading comment line
    CHECK(text.find(" obj: ") != std::string::npos);
    // exporting is deterministic
    CHECK(export_lp(model) == text);
}

TEST_CASE("export/read round trip preserves builder models") {
    TimingModel tm;
    Platform pf = hand_platform();

    SUBCASE("device model") {
        AppGraph g = single_task(1.0, attrs(2.0));
        auto [model, maps] = build_device_based(g, pf, tm);
        MilpModel back = read_lp(export_lp(model));
        CHECK(view_of(back).vars == view_of(model).vars);
        CHECK(view_of(back).cons == view_of(model).cons);
        CHECK(view_of(back).objective == view_of(model).objective);
        // binaries keep their kind and unit box
        int xv = back.var_by_name(model.vars[0].name);
        REQUIRE(xv >= 0);
        CHECK(back.vars[xv].kind == model.vars[0].kind);

        Solution a = solve_bnb(model);
        Solution b = solve_bnb(back);
        REQUIRE(a.status == Solution::Status::Optimal);
        REQUIRE(b.status == Solution::Status::Optimal);
        CHECK(close(a.objective, b.objective, 1e-12));
    }
    SUBCASE("time model") {
        AppGraph g = chain_tasks(1.0, {attrs(2.0), attrs(3.0)});
        force_uniform(tm, g, "p1", "m1");
        auto [model, maps] = build_time_based(g, pf, tm, topsort_bfs(g));
        MilpModel back = read_lp(export_lp(model));
        CHECK(view_of(back).vars == view_of(model).vars);
        CHECK(view_of(back).cons == view_of(model).cons);
        CHECK(view_of(back).objective == view_of(model).objective);

        Solution a = solve_bnb(model);
        Solution b = solve_bnb(back);
        REQUIRE(a.status == Solution::Status::Optimal);
        REQUIRE(b.status == Solution::Status::Optimal);
        CHECK(close(a.objective, b.objective, 1e-12));
    }
    SUBCASE("export of a re-read model is a fixed point") {
        AppGraph g = single_task(1.0, attrs(2.0));
        auto [model, maps] = build_device_based(g, pf, tm);
        std::string e1 = export_lp(model);
        std::string e2 = export_lp(read_lp(e1));
        std::string e3 = export_lp(read_lp(e2));
        CHECK(e2 == e3);
    }
}

TEST_CASE("reader accepts common hand-written variations") {
    SUBCASE("st keyword, implicit coefficients, signed rhs") {
        MilpModel m = read_lp(
            "Minimize\n"
            " cost: 2 x + 3 y\n"
            "st\n"
            " c1: x + y >= 1\n"
            " c2: - 2 x - 3 y >= - 6\n"
            "End\n");
        REQUIRE(m.vars.size() == 2);
        REQUIRE(m.cons.size() == 2);
        CHECK(m.cons[0].sense == MilpConstraint::Sense::GE);
        CHECK(m.cons[1].rhs == -6.0);
        Solution s = solve_bnb(m);
        REQUIRE(s.status == Solution::Status::Optimal);
        CHECK(close(s.objective, 2.0, 1e-9)); // x = 1, y = 0
    }
    SUBCASE("anonymous rows get generated names") {
        MilpModel m = read_lp(
            "Minimize\n"
            " obj: x\n"
            "Subject To\n"
            " x >= 1\n"
            " x <= 5\n"
            "End\n");
        REQUIRE(m.cons.size() == 2);
        CHECK(m.cons[0].name == "c0");
        CHECK(m.cons[1].name == "c1");
    }
    SUBCASE("scientific and fractional numbers, backslash comments") {
        MilpModel m = read_lp(
            "\\ a file comment\n"
            "Minimize\n"
            " obj: .5 a + 2.5e+2 b \\ trailing note\n"
            "Subject To\n"
            " r: a + 1e-3 b >= 4\n"
            "End\n");
        REQUIRE(m.objective.size() == 2);
        CHECK(m.objective[0].second == 0.5);
        CHECK(m.objective[1].second == 250.0);
        CHECK(m.cons[0].terms[1].second == 1e-3);
    }
    SUBCASE("bin keyword marks binaries with the unit box") {
        MilpModel m = read_lp(
            "Minimize\n obj: x\nSubject To\n r: x + y >= 1\n"
            "Bin\n x\nEnd\n");
        int x = m.var_by_name("x");
        REQUIRE(x >= 0);
        CHECK(m.vars[x].kind == MilpVar::Kind::Binary);
        CHECK(m.vars[x].lo == 0.0);
        CHECK(m.vars[x].hi == 1.0);
        CHECK(m.vars[m.var_by_name("y")].kind == MilpVar::Kind::Continuous);
    }
    SUBCASE("bounds forms: box, one-sided, fixed, free, infinity") {
        MilpModel m = read_lp(
            "Minimize\n obj: a\nSubject To\n r: a + b + c + d + e >= 1\n"
            "Bounds\n"
            " -2 <= a <= -1\n"
            " b >= 3\n"
            " c <= 7\n"
            " d = 5\n"
            " e free\n"
            " 0 <= f <= inf\n"
            "End\n");
        auto bounds = [&](const char* name) {
            const MilpVar& v = m.vars[m.var_by_name(name)];
            return std::pair<double, double>(v.lo, v.hi);
        };
        CHECK(bounds("a") == std::pair<double, double>(-2.0, -1.0));
        CHECK(bounds("b") == std::pair<double, double>(3.0, kInf));
        CHECK(bounds("c") == std::pair<double, double>(0.0, 7.0));
        CHECK(bounds("d") == std::pair<double, double>(5.0, 5.0));
        CHECK(bounds("e").first == -kInf);
        CHECK(bounds("e").second == kInf);
        CHECK(bounds("f") == std::pair<double, double>(0.0, kInf));
    }
}

TEST_CASE("reader errors carry 1-based line numbers") {
    CHECK_THROWS_WITH_AS(read_lp("Maximize\n obj: x\n"),
                         doctest::Contains("only Minimize"), error);
    CHECK_THROWS_WITH_AS(read_lp("Bounds\nEnd\n"),
                         doctest::Contains("expected Minimize"), error);
    CHECK_THROWS_WITH_AS(read_lp("Minimize\n obj: x\nBounds\nEnd\n"),
                         doctest::Contains("expected Subject To"), error);
    CHECK_THROWS_WITH_AS(
        read_lp("Minimize\n obj: 2 x\nSubject To\n c1: x + 1.2.3 y >= 1\nEnd\n"),
        doctest::Contains("at line 4: bad number 1.2.3"), error);
    CHECK_THROWS_WITH_AS(read_lp("Minimize\n obj: x@\n"),
                         doctest::Contains("at line 2: unexpected character '@'"),
                         error);
    CHECK_THROWS_WITH_AS(
        read_lp("Minimize\n obj: x\nSubject To\n c: x >= 1\nGeneral\n x\nEnd\n"),
        doctest::Contains("general integers are not supported"), error);
    CHECK_THROWS_WITH_AS(
        read_lp("Minimize\n obj: x\nSubject To\n c: x >= 1\n"),
        doctest::Contains("missing End"), error);
    CHECK_THROWS_WITH_AS(
        read_lp("Minimize\n obj: x\nSubject To\n c: x + y\nBounds\nEnd\n"),
        doctest::Contains("at line 4: row c has no relation"), error);
    CHECK_THROWS_WITH_AS(
        read_lp("Minimize\n obj: x\nSubject To\n r: x + 5 >= 1\nEnd\n"),
        doctest::Contains("number without variable in row r"), error);
    CHECK_THROWS_WITH_AS(read_lp("Minimize\n obj: 5\n"),
                         doctest::Contains("number without variable in objective"),
                         error);
    CHECK_THROWS_WITH_AS(
        read_lp("Minimize\n obj: x\nSubject To\n r: x >= 1\nBounds\n x 3\nEnd\n"),
        doctest::Contains("expected relation in bound"), error);
}

TEST_CASE("infinite upper bounds survive an export round trip") {
    MilpModel m;
    m.add_continuous("span", 0.0, kInf);
    m.add_continuous("frac", 0.25, 0.75);
    m.add_con({{0, 1.0}, {1, 1.0}}, MilpConstraint::Sense::GE, 1.0, "r");
    m.objective = {{0, 1.0}};
    std::string text = export_lp(m);
    CHECK(text.find(" span >= 0\n") != std::string::npos);
    CHECK(text.find(" 0.25 <= frac <= 0.75\n") != std::string::npos);
    MilpModel back = read_lp(text);
    CHECK(is_inf(back.vars[back.var_by_name("span")].hi));
    CHECK(back.vars[back.var_by_name("frac")].lo == 0.25);
}

TEST_CASE("solution listings export and import") {
    MilpModel m;
    int x = m.add_binary("x");
    int y = m.add_continuous("y", 0.0, kInf);
    m.add_con({{x, 1.0}, {y, 1.0}}, MilpConstraint::Sense::GE, 1.0, "need");
    m.objective = {{x, 2.0}, {y, 1.0}};

    SUBCASE("round trip of a solved point") {
        Solution sol = solve_bnb(m);
        REQUIRE(sol.status == Solution::Status::Optimal);
        CHECK(close(sol.objective, 1.0, 1e-9)); // y = 1 beats x = 1
        std::string text = export_solution(sol, m);
        CHECK(text.find("# status ") != std::string::npos);
        CHECK(text.find("# objective ") != std::string::npos);
        Solution back = import_solution(text, m);
        CHECK(back.status == Solution::Status::Feasible);
        CHECK(close(back.objective, sol.objective, 1e-12));
        REQUIRE(back.values.size() == 2);
        CHECK(close(back.values[y], sol.values[y], 1e-12));
    }
    SUBCASE("a violated row is reported by name") {
        Solution bad = import_solution("x 0\ny 0\n", m);
        CHECK(bad.status == Solution::Status::Infeasible);
        CHECK(bad.note.find("need") != std::string::npos);
        CHECK(is_inf(bad.objective));
    }
    SUBCASE("absent variables default to zero") {
        Solution s = import_solution("y 1\n", m);
        CHECK(s.status == Solution::Status::Feasible);
        CHECK(close(s.objective, 1.0, 1e-12));
        CHECK(s.values[x] == 0.0);
    }
    SUBCASE("comments and blank lines are ignored") {
        Solution s = import_solution("# header\n\nx 1 # inline\ny 0.5\n", m);
        CHECK(s.status == Solution::Status::Feasible);
        CHECK(close(s.objective, 2.5, 1e-12));
    }
    SUBCASE("parse errors name the line") {
        CHECK_THROWS_WITH_AS(import_solution("bogus 1\n", m),
                             doctest::Contains("line 1: unknown variable bogus"),
                             error);
        CHECK_THROWS_WITH_AS(import_solution("x 1\ny\n", m),
                             doctest::Contains("line 2: missing value for y"),
                             error);
        CHECK_THROWS_WITH_AS(import_solution("x 1 2\n", m),
                             doctest::Contains("line 1: trailing token 2"),
                             error);
    }
}

TEST_CASE("text file helpers round trip bytes") {
    const std::string path = "lpformat_test_scratch.txt";
    const std::string payload = "line one\n  line two\n\ntail";
    write_text_file(path, payload);
    CHECK(read_text_file(path) == payload);
    std::remove(path.c_str());
    CHECK_THROWS_WITH_AS(read_text_file("hetmap_missing_file.txt"),
                         doctest::Contains("cannot open"), error);
}

#include <doctest.h>

#include "masabs/eval.hpp"
#include "masabs/model.hpp"
#include "masabs/parser.hpp"
#include "voting_fixture.hpp"

using namespace masabs;

namespace {

// Shared variables x : -3..4, y : -3..3 and a : 0..3 (3 cells), one agent whose
// edge 0 carries the update under test.
MASGraph scratch(const std::string& update = "x := x") {
    return parse_mas("system { var x : -3..4; var y : -3..3; var a[0..2] : 0..3; }\n"
                     "agent P { loc l; init l; edge l -> l do " + update + "; }\n");
}

std::optional<std::int64_t> eval(const std::string& text, std::vector<int> val = {}) {
    const auto mas = scratch();
    const Layout lay(mas.shared);
    if (val.empty()) val = lay.initial();
    return eval_expr(parse_guard(text, mas), lay, val);
}

// slots: a[0], a[1], a[2], x, y
Valuation run_update(const std::string& update, Valuation val) {
    const auto mas = scratch(update);
    const auto out = effect(mas.agents[0].edges[0].update, Layout(mas.shared), val);
    REQUIRE(out.has_value());
    return *out;
}

}  // namespace

TEST_CASE("expression evaluation") {
    CHECK(eval("x == 0") == 1);
    CHECK(eval("7 % 3 + 1 == 2") == 1);
    CHECK(eval("-7 / 2 == -3") == 1);  // truncation toward zero
    CHECK(eval("-7 % 2 == -1") == 1);  // sign of the dividend
    CHECK(eval("x / (x - x) == 0") == std::nullopt);
    CHECK(eval("a[x + 3] == 0", {0, 0, 0, 0, 0}) == std::nullopt);  // index 3 is out of bounds
    CHECK(eval("a[x] == 2", {1, 2, 3, 1, 0}) == 1);
    CHECK(eval("a == [0, 0, 0]") == 1);
    CHECK(eval("!(x < 0) && (y >= 0 || false)") == 1);
}

TEST_CASE("updates apply in order, each seeing the previous results") {
    CHECK(run_update("x := x + 1; y := x", {0, 0, 0, 0, 0}) == Valuation{0, 0, 0, 1, 1});
    CHECK(run_update("x := 2; x := x * x", {0, 0, 0, 3, 0}) == Valuation{0, 0, 0, 4, 0});
    CHECK(run_update("a[x] := 3; x := a[x] - 1", {0, 0, 0, 1, 0}) == Valuation{0, 3, 0, 2, 0});

    const auto mas = scratch("x := x + 1");
    const Layout lay(mas.shared);
    CHECK_FALSE(effect(mas.agents[0].edges[0].update, lay, {0, 0, 0, 4, 0}).has_value());  // 5 is outside -3..4
    CHECK(effect(Update{}, lay, {1, 2, 3, 0, 0}) == Valuation{1, 2, 3, 0, 0});
}

TEST_CASE("substitution agrees with evaluation on every valuation") {
    const auto mas = parse_mas(kVoting);
    const auto& obey = mas.agents[0].edges[3];
    Binding x{"Voter.x", 0, {2}, false};
    const auto upd = substitute(obey.update, {x});
    CHECK(to_string(upd) == "K_voted[2] := 1");
    CHECK(is_true_lit(substitute(parse_guard("Voter.x == 1", mas), {Binding{"Voter.x", 0, {1}, false}})));
    CHECK(is_false_lit(substitute(parse_guard("Voter.x == 1", mas), {Binding{"Voter.x", 0, {2}, false}})));

    const auto g = parse_guard("K_voted[Voter.x] == 1 || Voter.x > K_refused + 1", mas);
    std::vector<VarDecl> vars = mas.shared;
    vars.push_back(mas.agents[0].vars[0]);
    const Layout lay(vars);
    for (int c = 0; c <= 3; ++c) {
        const auto gs = substitute(g, {Binding{"Voter.x", 0, {c}, false}});
        std::vector<std::pair<int, int>> ranges;
        for (int s = 0; s < lay.slot_count(); ++s) ranges.emplace_back(lay.slot_lo(s), lay.slot_hi(s));
        for_each_valuation(ranges, [&](const std::vector<int>& v) {
            if (v[static_cast<std::size_t>(lay.offset("Voter.x"))] != c) return;
            CHECK(eval_expr(gs, lay, v) == eval_expr(g, lay, v));
        });
    }
}

TEST_CASE("variable sets") {
    const auto mas = scratch("a[x] := y + 1");
    CHECK(vars_of(parse_guard("x == 1", mas)) == std::set<std::string>{"x"});
    CHECK(vars_of(Update{}).empty());
    CHECK(vars_of(mas.agents[0].edges[0].update) == std::set<std::string>{"a", "x", "y"});
    CHECK(writes_of(mas.agents[0].edges[0].update) == std::set<std::string>{"a"});
}

TEST_CASE("satisfying evaluations") {
    const VarDecl x{"x", 0, 3, 0, 0, {0}, true};
    CHECK(sat(parse_guard("true", scratch()), {VarDecl{"x", 0, 2, 0, 0, {0}, true}}).size() == 3);
    const auto mas = parse_mas("system { var x : 0..3; } agent P { loc l; init l; }");
    CHECK(sat(parse_guard("x == 1 || x == 2", mas), {x}) == std::vector<Valuation>{{1}, {2}});
    std::vector<std::string> diag;
    CHECK(sat(parse_guard("4 / x == 2", mas), {x}, &diag) == std::vector<Valuation>{{2}});
    CHECK(diag.size() == 1);  // x = 0 raises a division error

    const auto voting = parse_mas(kVoting);
    const auto g0 = voting.initial_condition();
    std::vector<VarDecl> all = voting.shared;
    all.push_back(voting.agents[0].vars[0]);
    CHECK(sat(g0, all) == std::vector<Valuation>{{0, 0, 0, 0, 0}});
}

TEST_CASE("parser accepts minimal systems and expands selects") {
    const auto one = parse_mas("system { } agent A { loc only; init only; }");
    CHECK(one.agents[0].edges.empty());
    const auto voting = parse_mas(kVoting);
    CHECK(voting.agents.size() == 2);
    CHECK(voting.agents[0].edges.size() == 5);  // three vote copies plus give and refuse
    CHECK(to_string(voting.agents[0].edges[1].update) == "Voter.x := 2");
}

TEST_CASE("parser errors carry positions") {
    auto fails_with = [](const std::string& text, const std::string& needle) {
        try {
            parse_mas(text);
        } catch (const ParseError& e) {
            const std::string msg = e.what();
            CAPTURE(msg);
            CHECK(msg.find(needle) != std::string::npos);
            CHECK(e.line() >= 1);
            return;
        }
        FAIL("no error for: " << text);
    };
    fails_with("system { var x : 0..1; init x >= 0; } agent A { loc l; init l; }", "non-unique initial evaluation");
    fails_with("system { var x : 0..1; init x == 5; } agent A { loc l; init l; }", "unsatisfiable");
    fails_with("system { } agent A { loc l; init l; edge l -> l [y == 1]; }", "y");
    fails_with("system { } agent A { loc l; init l; edge l -> m; }", "unknown location 'm'");
    fails_with("system { } agent A { loc l; init l; edge l -> l sync(c!); }", "c");
    fails_with("system { var x : 0..1; } agent A { loc l; init l; edge l -> l [x + 1]; }", "type mismatch");
    fails_with("system { } agent A { loc l; init l; clock t; }", "unknown");
    fails_with("system { var x : 0..1; } agent A { loc l; init l; edge l -> l select x : 0..1; }", "shadows");
    fails_with("system { }\nagent A {\n  loc l;\n  init l;\n  edge l -> l [1 == ];\n}", "5:");
}

TEST_CASE("text rendering round-trips") {
    const auto voting = parse_mas(kVoting);
    const auto again = parse_mas(to_text(voting));
    CHECK(to_text(again) == to_text(voting));
    CHECK(unwrap(combine(again)).n == unwrap(combine(voting)).n);
}

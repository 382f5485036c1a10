#include <doctest.h>

#include <algorithm>

#include "masabs/model.hpp"
#include "masabs/parser.hpp"
#include "voting_fixture.hpp"

using namespace masabs;

TEST_CASE("voting product: full and location-reachable parts") {
    const auto mas = parse_mas(kVoting);
    const auto full = combine(mas);
    CHECK(full.location_count() == 8);
    CHECK(full.edges.size() == 8);  // three vote copies per coercer location, plus give and refuse
    CHECK(full.location_name(full.initial) == "<idle,idle>");

    const auto r = combine_reachable(mas);
    CHECK(r.location_count() == 4);
    CHECK(r.edges.size() == 5);
    CHECK(r.find_location({2, 1}) >= 0);  // <obeyed,halt>
    CHECK(r.find_location({0, 1}) < 0);   // <idle,halt> needs a coercer move without the voter
    CHECK(r.location_props(r.initial) == std::vector<std::string>{"Voter.idle", "Coercer.idle"});

    const auto restricted = restrict_to_reachable_locations(full);
    CHECK(restricted.locations == r.locations);
    CHECK(restricted.edges.size() == r.edges.size());
}

TEST_CASE("a synchronised pair yields one edge, sender update first") {
    const auto mas = parse_mas(R"(
system { var x : 0..3; chan c; }
agent S { loc a, b; init a; edge a -> b sync(c!) do x := 1; }
agent R { loc a, b; init a; edge a -> b sync(c?) do x := x + 1; }
)");
    const auto g = combine_reachable(mas);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].provenance == std::vector<std::pair<int, int>>{{0, 0}, {1, 0}});
    const auto m = unwrap(g);
    REQUIRE(m.n == 2);
    CHECK(m.valuation(1)[0] == 2);
    CHECK(m.closure[1] == 1);
}

TEST_CASE("an unmatched send is reported and never fires") {
    const auto mas = parse_mas("system { chan c; } agent S { loc a, b; init a; edge a -> b sync(c!); }");
    std::vector<std::string> warnings;
    const auto g = combine(mas, &warnings);
    CHECK(warnings.size() == 1);
    CHECK(g.edges.empty());
}

TEST_CASE("unwrapping the voting example") {
    const auto m = unwrap(combine_reachable(parse_mas(kVoting)));
    CHECK(m.n == 10);  // initial, three votes, three obeyed, three refused
    CHECK(m.initial == std::vector<int>{0});
    int loops = 0;
    for (int s = 0; s < m.n; ++s) loops += m.closure[static_cast<std::size_t>(s)];
    CHECK(loops == 6);
    CHECK(m.prop("Coercer.halt")[0] == 0);
    CHECK_THROWS_AS(m.prop("Coercer.asleep"), DefectError);

    const auto seen = reachable(m);
    CHECK(std::count(seen.begin(), seen.end(), 1) == m.n);

    UnwrapOptions tight;
    tight.max_states = 4;
    CHECK_THROWS_AS(unwrap(combine_reachable(parse_mas(kVoting)), {}, tight), ResourceError);
}

TEST_CASE("guards blocking every move leave a single looping state") {
    const auto m = unwrap(combine_reachable(
        parse_mas("system { var x : 0..1; } agent A { loc l; init l; edge l -> l [x == 1]; }")));
    REQUIRE(m.n == 1);
    CHECK(m.closure[0] == 1);
    CHECK(m.successors(0).size() == 1);
}

TEST_CASE("explicit models and reachability") {
    const auto m = Model::build(4, {{0, 1}, {1, 0}, {2, 3}}, {0});
    CHECK(m.closure == std::vector<std::uint8_t>{0, 0, 0, 1});
    CHECK(reachable(m) == std::vector<std::uint8_t>{1, 1, 0, 0});
}

TEST_CASE("proposition projection keeps locations and guards over kept variables") {
    const auto mas = parse_mas(kVoting);
    const auto g1 = parse_guard("K_refused == 1", mas);
    const auto g2 = parse_guard("Voter.x == 2", mas);
    const auto m = unwrap(combine_reachable(mas), {g1, g2});
    const auto ap = project_ap(m, {"K_refused"});
    CHECK(std::find(ap.begin(), ap.end(), "Voter.idle") != ap.end());
    CHECK(std::find(ap.begin(), ap.end(), to_string(g1)) != ap.end());
    CHECK(std::find(ap.begin(), ap.end(), to_string(g2)) == ap.end());
}

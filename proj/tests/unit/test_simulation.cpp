#include <doctest.h>

#include "masabs/parser.hpp"
#include "masabs/simulation.hpp"
#include "voting_fixture.hpp"

using namespace masabs;

TEST_CASE("a model simulates itself") {
    const auto m = unwrap(combine(parse_mas(kVoting)));
    const std::set<std::string> vars{"K_voted", "K_refused", "Voter.x"};
    const auto r = check_simulation_vars(m, m, vars);
    REQUIRE(r.found);
    CHECK(verify_simulation(m, m, state_match(m, m, vars), r.relation).empty());
    for (int s = 0; s < m.n; ++s)
        CHECK(std::binary_search(r.relation.begin(), r.relation.end(), std::make_pair(s, s)));
}

TEST_CASE("a missing move blocks the simulation") {
    // a: 0 -> 1 (p at 1); b: 0 -> 0 (p nowhere)
    const auto a = Model::build(2, {{0, 1}}, {0}, {{"p", {0, 1}}});
    const auto b = Model::build(1, {{0, 0}}, {0}, {{"p", {0}}});
    const auto r = check_simulation(a, b, {"p"});
    CHECK_FALSE(r.found);
    CHECK(r.blocked_left == 0);
    CHECK(r.blocked_right == 0);
    CHECK(r.unmatched_move == 1);
    CHECK(check_simulation(b, a, {"p"}).found == false);
    CHECK(check_simulation(a, b, {}).found);
}

TEST_CASE("state matching ignores variables outside the set") {
    const auto m = unwrap(combine(parse_mas(kVoting)));
    // states 1..3 sit at <voted,idle> with x = 1, 2, 3
    CHECK(check_state_match(m, 1, m, 1, {"Voter.x"}));
    CHECK(check_state_match(m, 1, m, 2, {"K_refused"}));
    CHECK_FALSE(check_state_match(m, 1, m, 2, {"Voter.x"}));
    CHECK_FALSE(check_state_match(m, 0, m, 1, {}));
}

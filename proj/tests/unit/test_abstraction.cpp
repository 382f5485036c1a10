#include <doctest.h>

#include <algorithm>

#include "masabs/abstraction.hpp"
#include "masabs/parser.hpp"
#include "masabs/simulation.hpp"
#include "voting_fixture.hpp"

using namespace masabs;

namespace {

Mapping removal(const std::string& agent, std::vector<std::string> sources) {
    Mapping m;
    m.agent = agent;
    m.sources = std::move(sources);
    return m;
}

}  // namespace

TEST_CASE("removing the vote splits the obey edge per candidate") {
    const auto mas = parse_mas(kVoting);
    AbstractionReport rep;
    const auto abs = abstract_mas(mas, {removal("Voter", {"x"})}, {}, &rep);
    const auto& voter = abs.agents[0];
    CHECK(voter.vars.empty());
    CHECK(voter.locations == mas.agents[0].locations);
    int vote = 0, obey = 0, refuse = 0;
    for (const auto& e : voter.edges) {
        if (e.src == 0) ++vote;
        if (e.dst == 2) ++obey;
        if (e.dst == 3) ++refuse;
    }
    CHECK(vote == 1);  // the three selections collapse into one tau edge
    CHECK(obey == 3);
    CHECK(refuse == 1);
    CHECK(rep.forks == 0);

    const auto mc = unwrap(combine(mas));
    const auto ma = unwrap(combine(abs));
    const auto keep = kept_variables(mas, {removal("Voter", {"x"})});
    CHECK(keep == std::set<std::string>{"K_refused", "K_voted"});
    CHECK(check_simulation_vars(mc, ma, keep).found);
    // parse_mas accepts the rendered abstraction
    CHECK(unwrap(combine(parse_mas(to_text(abs)))).n == ma.n);
}

TEST_CASE("must abstraction of the vote is flagged unsupported") {
    const auto mas = parse_mas(kVoting);
    AbstractionReport rep;
    AbstractionOptions opts;
    opts.mode = AbsMode::Must;
    const auto abs = abstract_mas(mas, {removal("Voter", {"x"})}, opts, &rep);
    CHECK_FALSE(rep.supported);
    CHECK(rep.unsupported_edges >= 1);
    const auto mc = unwrap(combine(mas));
    const auto ma = unwrap(combine(abs));
    CHECK_FALSE(check_simulation_vars(ma, mc, kept_variables(mas, {removal("Voter", {"x"})})).found);
}

TEST_CASE("identity merge mirrors the source") {
    const auto mas = parse_mas(kVoting);
    const auto cfg = parse_abstraction_config(R"(
mode = "may"
[[mapping]]
agent = "Voter"
sources = ["x"]
target = "z"
fn = "identity"
)", mas);
    const auto abs = abstract_mas(mas, cfg.mappings);
    CHECK(unwrap(combine(abs)).n == unwrap(combine(mas)).n);
    AbstractionOptions must;
    must.mode = AbsMode::Must;
    AbstractionReport rep;
    abstract_mas(mas, cfg.mappings, must, &rep);
    CHECK(rep.supported);
}

TEST_CASE("parity merge collapses candidates by parity") {
    const auto mas = parse_mas(kVoting);
    const auto cfg = parse_abstraction_config(
        "[[mapping]]\nagent = \"Voter\"\nsources = [\"x\"]\ntarget = \"z\"\nfn = \"parity\"\n", mas);
    REQUIRE(cfg.mappings.size() == 1);
    CHECK(cfg.mappings[0].target->lo == 0);
    CHECK(cfg.mappings[0].target->hi == 1);
    const auto abs = abstract_mas(mas, cfg.mappings);
    const auto mc = unwrap(combine(mas));
    const auto ma = unwrap(combine(abs));
    CHECK(check_simulation_vars(mc, ma, kept_variables(mas, cfg.mappings)).found);
}

TEST_CASE("config errors are reported") {
    const auto mas = parse_mas(kVoting);
    CHECK_THROWS_AS(parse_abstraction_config("[[mapping]]\nagent = \"Nobody\"\nsources = [\"x\"]\n", mas),
                    AbstractionError);
    CHECK_THROWS_AS(parse_abstraction_config("[[mapping]]\nagent = \"Voter\"\nsources = [\"y\"]\n", mas),
                    AbstractionError);
    CHECK_THROWS_AS(parse_abstraction_config("[[mapping]]\nagent = \"Voter\"\nsources = [\"x\"]\nscope = [\"nowhere\"]\n", mas),
                    AbstractionError);
    CHECK_THROWS_AS(parse_abstraction_config("[[mapping]]\nagent = \"Voter\"\nsources = [\"x\"]\ntarget = \"z\"\ndomain = \"0..1\"\nfn = \"identity\"\n", mas),
                    AbstractionError);
}

TEST_CASE("an instance enabled on the abstraction of a deadlock gets a guarded self-loop") {
    // s never becomes 1, so v stays 0 and the system is stuck at l0; the
    // upper domain still admits v = 1 at l0 because the guard on s is satisfiable
    const auto mas = parse_mas(R"(
system { var s : 0..1; }
agent A {
  var v : 0..1;
  loc l0, l1;
  init l0;
  edge l0 -> l0 [s == 1] do v := 1;
  edge l0 -> l1 [v == 1];
}
)");
    AbstractionReport rep;
    const auto abs = abstract_mas(mas, {removal("A", {"A.v"})}, {}, &rep);
    CHECK(rep.stutters == 1);
    const auto mc = unwrap(combine(mas));
    const auto ma = unwrap(combine(abs));
    CHECK(mc.n == 1);
    CHECK(check_simulation_vars(mc, ma, {"s"}).found);

    // without the extra loop the abstract initial state is not dead, so the
    // concrete closure loop has no partner
    auto stripped = abs;
    auto& edges = stripped.agents[0].edges;
    edges.erase(std::remove_if(edges.begin(), edges.end(), [](const Edge& e) { return e.origin < 0; }), edges.end());
    CHECK_FALSE(check_simulation_vars(mc, unwrap(combine(stripped)), {"s"}).found);
}

TEST_CASE("exact abstractions add no self-loops") {
    AbstractionReport rep;
    const auto mas = parse_mas(kVoting);
    abstract_mas(mas, {removal("Voter", {"Voter.x"})}, {}, &rep);
    CHECK(rep.stutters == 0);
}

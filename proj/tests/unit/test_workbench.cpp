#include <doctest.h>

#include <algorithm>
#include <regex>

#include "masabs/checker.hpp"
#include "masabs/config.hpp"
#include "masabs/parser.hpp"
#include "masabs/workbench.hpp"

using namespace masabs;

namespace {

int count_matches(const std::string& text, const std::string& pattern) {
    const std::regex re(pattern);
    return static_cast<int>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

bool holds(const MASGraph& m, const std::string& formula) {
    const auto f = parse_formula(formula, m);
    return check(unwrap(combine_reachable(m), guard_atoms(f)), f).holds;
}

std::size_t states(const MASGraph& m) { return static_cast<std::size_t>(unwrap(combine_reachable(m)).n); }

}  // namespace

TEST_CASE("voting generator") {
    const auto one = gen_asv(1);
    CHECK(std::count_if(one.agents[0].edges.begin(), one.agents[0].edges.end(),
                        [](const Edge& e) { return e.src == 0; }) == 1);
    const auto three = gen_asv(3);
    CHECK(three.agents[0].edges.size() == 5);
    CHECK_THROWS(gen_asv(0));
}

TEST_CASE("postal generator") {
    CHECK_THROWS(gen_postal(0, 1));
    CHECK_THROWS(gen_postal(1, 0));
    const auto m = gen_postal(2, 2);
    CHECK(m.agents.size() == 3);
    CHECK(m.find_var("Authority.tally") != nullptr);
    CHECK(m.find_var("Voter2.mem_dec") != nullptr);
    CHECK(holds(m, phi_bstuff_text(2, 2)));
    CHECK_FALSE(holds(m, phi_dispatch_text(2)));
}

TEST_CASE("postal abstractions shrink the state space and keep the verdicts") {
    const auto m = gen_postal(3, 1);
    const auto concrete = states(m);
    for (int k = 1; k <= 3; ++k) {
        CAPTURE(k);
        const auto may = abstract_mas(m, postal_abstraction(m, k));
        CHECK(states(may) < concrete);
        CHECK(holds(may, phi_bstuff_text(3, 1)));
        AbstractionOptions o;
        o.mode = AbsMode::Must;
        AbstractionReport rep;
        const auto must = abstract_mas(m, postal_abstraction(m, k), o, &rep);
        CHECK(rep.supported);
        CHECK_FALSE(holds(must, phi_dispatch_text(3)));
    }
    CHECK_THROWS(postal_abstraction(m, 4));
}

TEST_CASE("bench rows follow the grid whatever the worker count") {
    BenchConfig cfg;
    cfg.nv_lo = 1;
    cfg.nv_hi = 2;
    cfg.nc_lo = 1;
    cfg.nc_hi = 2;
    cfg.variants = {BenchVariant::Concrete, BenchVariant::Abs1};
    cfg.workers = 3;
    const auto rows = run_bench(cfg);
    REQUIRE(rows.size() == 8);
    std::size_t i = 0;
    for (int nv = 1; nv <= 2; ++nv)
        for (int nc = 1; nc <= 2; ++nc)
            for (auto v : cfg.variants) {
                CHECK(rows[i].nv == nv);
                CHECK(rows[i].nc == nc);
                CHECK(rows[i].variant == v);
                CHECK(rows[i].verdict == "true");
                ++i;
            }
    cfg.workers = 1;
    const auto serial = run_bench(cfg);
    for (std::size_t k = 0; k < rows.size(); ++k) CHECK(serial[k].states == rows[k].states);

    const auto csv = bench_csv(rows);
    CHECK(csv.starts_with("NV,NC,variant,states,ta_ms,tv_ms,verdict,memout\n"));
    CHECK(count_matches(csv, "\n") == 9);
}

TEST_CASE("bench records a state budget overrun as memout") {
    BenchConfig cfg;
    cfg.nv_lo = cfg.nv_hi = 2;
    cfg.max_states = 10;
    const auto rows = run_bench(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].memout);
    CHECK_FALSE(rows[0].states.has_value());
    CHECK(bench_csv(rows).find("2,1,concrete,,") != std::string::npos);
}

TEST_CASE("bench config") {
    const auto cfg = parse_bench_config(
        "nv = \"1..3\"\nnc = \"2..2\"  # one column\nvariants = [\"concrete\", \"abstraction-3\"]\n"
        "mode = \"must\"\nformula = \"dispatch\"\nworkers = 2\n");
    CHECK(cfg.nv_hi == 3);
    CHECK(cfg.nc_lo == 2);
    CHECK(cfg.variants.size() == 2);
    CHECK(cfg.mode == AbsMode::Must);
    CHECK(cfg.workers == 2);
    CHECK_THROWS_AS(parse_bench_config("nv = \"3..1\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_bench_config("variants = []\n"), ConfigError);
    CHECK_THROWS_AS(parse_bench_config("variants = [\"abstraction-9\"]\n"), ConfigError);
    CHECK_THROWS_AS(parse_bench_config("variants = [\"custom\"]\n"), ConfigError);
    CHECK_THROWS_AS(parse_bench_config("workers = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_bench_config("colour = \"red\"\n"), ConfigError);
}

TEST_CASE("DOT export") {
    const auto asv = gen_asv(3);
    const auto voter = export_dot(asv.agents[0]);
    CHECK(voter.starts_with("digraph"));
    CHECK(count_matches(voter, R"(\n  n\d+ \[label)") == 4);
    CHECK(voter.find("give!") != std::string::npos);

    const auto combined = export_dot(combine(asv));
    CHECK(count_matches(combined, R"(\n  n\d+ \[label)") == 8);
    CHECK(combined.find("[Voter#3 + Coercer#0]") != std::string::npos);

    const auto single = Model::build(1, {}, {0});
    const auto dot = export_dot(single);
    CHECK(count_matches(dot, R"(\n  s\d+ \[label)") == 1);
    CHECK(dot.find("s0 -> s0") != std::string::npos);
}

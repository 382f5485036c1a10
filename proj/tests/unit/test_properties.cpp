// Small-scale versions of the property suites; the acceptance binary runs
// the full counts.

#include <doctest.h>

#include "masabs/checker.hpp"
#include "masabs/domains.hpp"
#include "masabs/simulation.hpp"
#include "support/generators.hpp"
#include "support/lasso_oracle.hpp"

using namespace masabs;

TEST_CASE("random systems parse and render back to the same model") {
    gen::Rng rng(11);
    for (int i = 0; i < 80; ++i) {
        const auto text = gen::random_system(rng);
        CAPTURE(text);
        const auto mas = parse_mas(text);
        const auto again = parse_mas(to_text(mas));
        CHECK(to_text(again) == to_text(mas));
        CHECK(unwrap(combine(again)).n == unwrap(combine(mas)).n);
    }
}

TEST_CASE("fixpoint checker agrees with lasso enumeration on small models") {
    gen::Rng rng(5);
    const std::vector<FormulaPtr> atoms{fm::loc("p0"), fm::loc("p1"), fm::loc("p2")};
    for (int i = 0; i < 150; ++i) {
        const auto m = gen::random_model(rng, gen::pick(rng, 1, 40));
        const auto f = gen::random_formula(rng, atoms, 3);
        const bool strict = gen::coin(rng, 0.25);
        CAPTURE(to_string(f));
        oracle::LassoOracle o(m, strict, 5'000'000);
        CHECK(check(m, f, {.strict_until = strict}).holds == o.holds(f));
    }
}

TEST_CASE("may abstractions of random systems are simulations") {
    gen::Rng rng(23);
    int done = 0;
    for (int i = 0; i < 120; ++i) {
        const auto mas = parse_mas(gen::random_system(rng));
        const auto maps = gen::random_mappings(rng, mas);
        if (maps.empty()) continue;
        CAPTURE(to_text(mas));
        const auto abs = abstract_mas(mas, maps);
        const auto keep = kept_variables(mas, maps);
        const auto mc = unwrap(combine(mas));
        const auto ma = unwrap(combine(abs));
        const auto r = check_simulation_vars(mc, ma, keep);
        CHECK(r.found);
        if (r.found) CHECK(verify_simulation(mc, ma, state_match(mc, ma, keep), r.relation).empty());
        ++done;
    }
    CHECK(done > 50);
}

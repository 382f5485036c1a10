// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// fails. Pass criterion numbers as arguments to run a subset.

#include <sys/resource.h>

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "masabs/checker.hpp"
#include "masabs/domains.hpp"
#include "masabs/parser.hpp"
#include "masabs/simulation.hpp"
#include "masabs/workbench.hpp"
#include "support/generators.hpp"
#include "support/lasso_oracle.hpp"

using namespace masabs;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
    std::vector<std::string> notes;
};

std::string fmt(double x, int digits = 2) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(digits);
    o << x;
    return o.str();
}

// One random system with a non-empty abstraction, drawn the same way by
// criteria 3, 4 and 6.
struct Case {
    MASGraph mas;
    std::vector<Mapping> maps;
    std::set<std::string> keep;
};

Case next_case(gen::Rng& rng) {
    while (true) {
        Case c{parse_mas(gen::random_system(rng)), {}, {}};
        c.maps = gen::random_mappings(rng, c.mas);
        if (c.maps.empty()) continue;
        c.keep = kept_variables(c.mas, c.maps);
        return c;
    }
}

MASGraph abstract_as(const Case& c, AbsMode mode, AbstractionReport* rep = nullptr) {
    AbstractionOptions o;
    o.mode = mode;
    return abstract_mas(c.mas, c.maps, o, rep);
}

Model model_of(const MASGraph& m, const std::vector<ExprPtr>& guards = {}) { return unwrap(combine_reachable(m), guards); }

bool holds(const MASGraph& m, const FormulaPtr& f) { return check(model_of(m, guard_atoms(f)), f).holds; }

Outcome table_reproduction() {
    const auto t0 = Clock::now();
    const auto g = combine_reachable(gen_asv(3));
    const auto r = reachability_index(g);
    const auto d = approx_local_domain(g, {"Voter.x"}, DomainMode::Upper);
    const std::vector<VecSet> want{{{0}}, {{1}, {2}, {3}}, {{1}, {2}, {3}}, {{1}, {2}, {3}}};
    std::vector<std::string> names;
    for (int l = 0; l < g.location_count(); ++l) names.push_back(g.location_name(l));
    const std::vector<std::string> want_names{"<idle,idle>", "<voted,idle>", "<obeyed,halt>", "<disobeyed,halt>"};
    const double s = seconds_since(t0);
    Outcome o;
    o.pass = names == want_names && r == std::vector<int>{3, 2, 0, 0} && d.table == want && s < 1.0;
    std::string rs;
    for (int x : r) rs += (rs.empty() ? "" : ",") + std::to_string(x);
    o.detail = "r=(" + rs + "), d over 4 locations " + (d.table == want ? "matches" : "differs") + " (" + fmt(s, 3) + " s)";
    return o;
}

Outcome voting_verdicts() {
    const auto t0 = Clock::now();
    const auto mas = gen_asv(3);
    const bool a = holds(mas, parse_formula("A[] (!obeyed || K_voted[x] == 1)", mas));
    const bool b = holds(mas, parse_formula("A[] (!disobeyed || K_refused == 1)", mas));
    const bool c = holds(mas, parse_formula("A<> (!(K_voted == [0,0,0]))", mas));
    const double s = seconds_since(t0);
    Outcome o;
    o.pass = a && b && !c && s < 1.0;
    o.detail = std::string("obeyed->voted ") + (a ? "true" : "false") + ", disobeyed->refused " + (b ? "true" : "false") +
               ", eventually-voted " + (c ? "true" : "false") + " (" + fmt(s, 3) + " s)";
    return o;
}

Outcome may_soundness() {
    const auto t0 = Clock::now();
    gen::Rng rng(3001);
    int total = 0, found = 0, stutters = 0;
    Outcome o;
    for (; total < 600; ++total) {
        const auto c = next_case(rng);
        AbstractionReport rep;
        const auto mc = model_of(c.mas);
        const auto ma = model_of(abstract_as(c, AbsMode::May, &rep));
        const auto r = check_simulation_vars(mc, ma, c.keep);
        stutters += rep.stutters > 0;
        if (r.found && verify_simulation(mc, ma, state_match(mc, ma, c.keep), r.relation).empty()) ++found;
        else if (o.notes.size() < 3) o.notes.push_back("no simulation: " + r.reason + "\n" + to_text(c.mas));
    }
    const double s = seconds_since(t0);
    o.pass = found == total && total >= 500 && s < 600;
    o.detail = std::to_string(found) + "/" + std::to_string(total) + " simulated (" + std::to_string(stutters) +
               " needed deadlock self-loops) (" + fmt(s) + " s)";
    return o;
}

Outcome must_soundness() {
    const auto t0 = Clock::now();
    gen::Rng rng(3001);
    int total = 0, supported = 0, sim_supported = 0, unsupported = 0, unsupported_simulated = 0;
    Outcome o;
    for (; total < 600; ++total) {
        const auto c = next_case(rng);
        AbstractionReport rep;
        const auto mu = model_of(abstract_as(c, AbsMode::Must, &rep));
        const auto mc = model_of(c.mas);
        const auto r = check_simulation_vars(mu, mc, c.keep);
        if (rep.supported) {
            ++supported;
            if (r.found && verify_simulation(mu, mc, state_match(mu, mc, c.keep), r.relation).empty()) ++sim_supported;
            else if (o.notes.size() < 3) o.notes.push_back("supported but not simulated: " + r.reason + "\n" + to_text(c.mas));
        } else {
            // never counted as a pass: reported with the rejection reason and
            // the empirical outcome
            ++unsupported;
            unsupported_simulated += r.found;
            o.notes.push_back("case " + std::to_string(total) + " excluded: " +
                              (rep.diagnostics.empty() ? std::string("no diagnostic") : rep.diagnostics.front()) +
                              (r.found ? " [simulated]" : " [not simulated]"));
        }
    }
    const double s = seconds_since(t0);
    o.pass = supported > 0 && sim_supported == supported && s < 600;
    o.detail = std::to_string(sim_supported) + "/" + std::to_string(supported) + " supported cases simulated; " +
               std::to_string(unsupported) + " unsupported excluded (empirically simulated anyway: " +
               std::to_string(unsupported_simulated) + ", not simulated: " +
               std::to_string(unsupported - unsupported_simulated) + ") (" + fmt(s) + " s)";
    return o;
}

// Projection of state s onto the tracked variables, cells in layout order.
ValueVec projection(const Model& m, int s, const std::vector<VarDecl>& vars) {
    ValueVec v;
    const auto val = m.valuation(s);
    for (const auto& d : vars)
        for (int k = 0; k < d.cells(); ++k) v.push_back(val[static_cast<std::size_t>(m.layout.offset(d.name) + k)]);
    return v;
}

Outcome domain_bounds() {
    const auto t0 = Clock::now();
    gen::Rng rng(5005);
    int systems = 0, checked = 0, upper_ok = 0, lower_ok = 0, skipped = 0;
    std::vector<MASGraph> pool{gen_asv(3), gen_postal(2, 2), gen_postal(3, 1)};
    for (int i = 0; i < 400; ++i) pool.push_back(parse_mas(gen::random_system(rng)));
    Outcome o;
    for (const auto& mas : pool) {
        ++systems;
        const auto g = combine_reachable(mas);
        Model m;
        try {
            UnwrapOptions uo;
            uo.max_states = 100'000;
            m = unwrap(g, {}, uo);
        } catch (const ResourceError&) {
            ++skipped;
            continue;
        }
        std::vector<std::string> all;
        for (const auto& v : g.vars) all.push_back(v.name);
        std::shuffle(all.begin(), all.end(), rng);
        const std::vector<std::string> tracked(all.begin(), all.begin() + gen::pick(rng, 1, static_cast<int>(all.size())));
        const auto up = approx_local_domain(g, tracked, DomainMode::Upper);
        const auto lo = approx_local_domain(g, tracked, DomainMode::Lower);
        std::vector<VecSet> seen(static_cast<std::size_t>(g.location_count()));
        for (int s = 0; s < m.n; ++s)
            seen[static_cast<std::size_t>(m.loc[static_cast<std::size_t>(s)])].insert(projection(m, s, up.vars));
        bool u = true, l = true;
        for (std::size_t k = 0; k < seen.size(); ++k) {
            for (const auto& v : seen[k]) u = u && up.table[k].count(v);
            for (const auto& v : lo.table[k]) l = l && seen[k].count(v);
        }
        ++checked;
        upper_ok += u;
        lower_ok += l;
        if ((!u || !l) && o.notes.size() < 3) o.notes.push_back(std::string(u ? "lower" : "upper") + " bound fails on\n" + to_text(mas));
    }
    o.pass = checked > 0 && upper_ok == checked && lower_ok == checked;
    o.detail = "upper contains reachable " + std::to_string(upper_ok) + "/" + std::to_string(checked) +
               ", lower witnessed " + std::to_string(lower_ok) + "/" + std::to_string(checked) + " (" +
               std::to_string(skipped) + " of " + std::to_string(systems) + " over 1e5 states) (" +
               fmt(seconds_since(t0)) + " s)";
    return o;
}

// Location atoms plus value tests on the variables the abstraction keeps.
std::vector<FormulaPtr> kept_atoms(gen::Rng& rng, const Case& c) {
    std::vector<FormulaPtr> atoms;
    for (const auto& a : c.mas.agents)
        for (const auto& l : a.locations) atoms.push_back(fm::loc(a.name + "." + l));
    for (const auto& name : c.keep) {
        const auto* d = c.mas.find_var(name);
        for (int k = 0; k < 2; ++k) {
            const auto lhs = d->is_array() ? ex::index(name, ex::integer(gen::pick(rng, 0, d->cells() - 1) + d->index_lo))
                                            : ex::var(name);
            atoms.push_back(fm::guard(ex::eq(lhs, ex::integer(gen::pick(rng, d->lo, d->hi)))));
        }
    }
    return atoms;
}

Outcome actl_preservation() {
    const auto t0 = Clock::now();
    gen::Rng rng(6006);
    int triples = 0, may_only = 0, violations = 0, may_true = 0, must_false = 0;
    Outcome o;
    while (triples < 250) {
        const auto c = next_case(rng);
        AbstractionReport rep;
        const auto may = abstract_as(c, AbsMode::May);
        const auto must = abstract_as(c, AbsMode::Must, &rep);
        const auto atoms = kept_atoms(rng, c);
        for (int k = 0; k < 2; ++k) {
            const auto f = gen::random_formula(rng, atoms, 3);
            const bool conc = holds(c.mas, f);
            const bool hm = holds(may, f);
            bool bad = hm && !conc;
            may_true += hm;
            if (rep.supported) {
                const bool hu = holds(must, f);
                bad = bad || (!hu && conc);
                must_false += !hu;
                ++triples;
            } else {
                ++may_only;
            }
            if (bad) {
                ++violations;
                if (o.notes.size() < 3) o.notes.push_back("violated by " + to_string(f) + " on\n" + to_text(c.mas));
            }
        }
    }
    o.pass = violations == 0 && triples >= 200;
    o.detail = std::to_string(triples) + " triples with both directions, " + std::to_string(may_only) +
               " may-only (must unsupported); may-true " + std::to_string(may_true) + ", must-false " +
               std::to_string(must_false) + ", violations " + std::to_string(violations) + " (" + fmt(seconds_since(t0)) +
               " s)";
    return o;
}

Outcome checker_vs_oracle() {
    const auto t0 = Clock::now();
    gen::Rng rng(7007);
    const std::vector<FormulaPtr> atoms{fm::loc("p0"), fm::loc("p1"), fm::loc("p2")};
    int agree = 0, total = 0, max_states = 0;
    Outcome o;
    for (; total < 1000; ++total) {
        const int n = gen::pick(rng, 1, 200);
        max_states = std::max(max_states, n);
        const auto m = gen::random_model(rng, n);
        const auto f = gen::random_formula(rng, atoms, 3);
        const bool strict = gen::coin(rng, 0.25);
        try {
            oracle::LassoOracle orc(m, strict, 50'000'000);
            if (orc.holds(f) == check(m, f, {.strict_until = strict}).holds) ++agree;
            else if (o.notes.size() < 3) o.notes.push_back("disagree on " + to_string(f));
        } catch (const oracle::TooManyLassos&) {
            if (o.notes.size() < 3) o.notes.push_back("oracle budget exhausted on a " + std::to_string(n) + "-state model");
        }
    }
    o.pass = agree == total;
    o.detail = std::to_string(agree) + "/" + std::to_string(total) + " agree (models up to " + std::to_string(max_states) +
               " states, depth <= 3) (" + fmt(seconds_since(t0)) + " s)";
    return o;
}

// Published reference counts per (NV, NC), rounded to three significant
// digits from 1e4 on: concrete, abstraction 1, 2, 3 (may) and 1, 2, 3 (must,
// independent of NC). Reported next to ours; the models differ in detail.
constexpr double kRefMay[4][3][4] = {
    {{23, 19, 18, 16}, {27, 21, 20, 17}, {31, 23, 22, 18}},
    {{241, 141, 126, 93}, {369, 177, 166, 106}, {529, 217, 214, 120}},
    {{2987, 1140, 972, 567}, {6075, 1620, 1570, 693}, {1.09e4, 2200, 2440, 838}},
    {{3.98e4, 9570, 7940, 3540}, {1.06e5, 1.52e4, 1.60e4, 4620}, {2.36e5, 2.26e4, 2.99e4, 5940}},
};
constexpr int kRefMust[4][3] = {{15, 14, 14}, {81, 70, 70}, {459, 368, 368}, {2673, 2002, 2002}};

std::string ref_counts(int nv, int nc) {
    const auto& r = kRefMay[nv - 1][nc - 1];
    std::ostringstream os;
    os << std::fixed << std::setprecision(0) << r[0] << "/" << r[1] << "/" << r[2] << "/" << r[3];
    const auto& m = kRefMust[nv - 1];
    os << ", must " << m[0] << "/" << m[1] << "/" << m[2];
    return os.str();
}

Outcome postal_grid() {
    const auto t0 = Clock::now();
    int cells = 0, ok = 0;
    Outcome o;
    for (int nv = 1; nv <= 4; ++nv)
        for (int nc = 1; nc <= 3; ++nc) {
            ++cells;
            const auto mas = gen_postal(nv, nc);
            const auto bstuff = phi_bstuff_text(nv, nc), dispatch = phi_dispatch_text(nv);
            const auto fb = parse_formula(bstuff, mas), fd = parse_formula(dispatch, mas);
            const auto concrete = model_of(mas, guard_atoms(fb));
            bool good = check(concrete, fb).holds && !holds(mas, fd);
            std::string counts = std::to_string(concrete.n), must_counts;
            for (int k = 1; k <= 3; ++k) {
                const auto maps = postal_abstraction(mas, k);
                const auto may = abstract_mas(mas, maps);
                AbstractionOptions mo;
                mo.mode = AbsMode::Must;
                AbstractionReport rep;
                const auto must = abstract_mas(mas, maps, mo, &rep);
                const auto mm = model_of(may, guard_atoms(parse_formula(bstuff, may)));
                good = good && check(mm, parse_formula(bstuff, may)).holds;
                good = good && rep.supported && !holds(must, parse_formula(dispatch, must));
                if (nv >= 3) good = good && mm.n < concrete.n;
                counts += "/" + std::to_string(mm.n);
                must_counts += (k > 1 ? "/" : "") + std::to_string(model_of(must, {}).n);
            }
            ok += good;
            o.notes.push_back("NV=" + std::to_string(nv) + " NC=" + std::to_string(nc) + " states concrete/abs1/abs2/abs3 " +
                              counts + ", must " + must_counts + " (reference " + ref_counts(nv, nc) + ")" +
                              (good ? "" : " FAILED"));
        }
    const double s = seconds_since(t0);
    o.pass = ok == cells && s < 300;
    o.detail = std::to_string(ok) + "/" + std::to_string(cells) + " grid cells with expected verdicts and reductions (" +
               fmt(s) + " s)";
    return o;
}

Outcome unwrap_scale() {
    const auto mas = gen_postal(5, 2);
    const auto t0 = Clock::now();
    UnwrapStats st;
    const auto m = unwrap(combine_reachable(mas), {}, {}, &st);
    const double s = seconds_since(t0);
    rusage ru{};
    getrusage(RUSAGE_SELF, &ru);
    const double peak_gb = static_cast<double>(ru.ru_maxrss) / (1024.0 * 1024.0);
    Outcome o;
    o.pass = m.n >= 1'000'000 && s < 60 && peak_gb < 4.0;
    o.detail = std::to_string(m.n) + " states, " + std::to_string(m.transition_count()) + " transitions in " + fmt(s) +
               " s, process peak RSS " + fmt(peak_gb, 3) + " GB";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"domain table on the three-candidate voting model", table_reproduction},
        {"voting model verdicts", voting_verdicts},
        {"may-abstractions are simulations", may_soundness},
        {"supported must-abstractions are simulated", must_soundness},
        {"upper and lower domain bounds", domain_bounds},
        {"universal formulas carry over", actl_preservation},
        {"fixpoint checker agrees with lasso enumeration", checker_vs_oracle},
        {"postal voting grid", postal_grid},
        {"unwrapping at a million states", unwrap_scale},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
    bool all_pass = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        all_pass = all_pass && o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << id << " " << criteria[i].first << ": " << o.detail << std::endl;
        for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    }
    return all_pass ? 0 : 1;
}

#pragma once

// Random systems, abstractions, formulas and models for property tests.

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "masabs/abstraction.hpp"
#include "masabs/formula.hpp"
#include "masabs/model.hpp"
#include "masabs/parser.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }
template <class T>
const T& pick_of(Rng& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(v.size()) - 1))];
}

struct GenVar {
    std::string name;  // as written in the agent block (or shared name)
    int lo, hi;
    int len;  // 0 for scalars
    int owner;  // -1 shared
};

// Up to 3 agents with up to 4 locations, up to 3 variables (domains of at
// most 3 values, occasionally a 2-cell array) and up to 2 channels.
inline std::string random_system(Rng& rng) {
    const int nagents = pick(rng, 1, 3);
    const int nchans = pick(rng, 0, 2);
    const int nvars = pick(rng, 1, 3);
    std::vector<GenVar> vars;
    for (int i = 0; i < nvars; ++i) {
        GenVar v;
        v.owner = coin(rng, 0.35) ? -1 : pick(rng, 0, nagents - 1);
        v.name = (v.owner < 0 ? "s" : "v") + std::to_string(i);
        v.lo = coin(rng, 0.8) ? 0 : -1;
        v.hi = v.lo + pick(rng, 1, 2);
        v.len = coin(rng, 0.15) ? 2 : 0;
        vars.push_back(v);
    }
    auto visible = [&](int agent) {
        std::vector<GenVar> out;
        for (const auto& v : vars)
            if (v.owner < 0 || v.owner == agent) out.push_back(v);
        return out;
    };
    auto ref = [&](const GenVar& v) {
        if (!v.len) return v.name;
        return v.name + "[" + std::to_string(pick(rng, 0, 1)) + "]";
    };
    auto operand = [&](const std::vector<GenVar>& vis) -> std::string {
        if (vis.empty() || coin(rng, 0.3)) return std::to_string(pick(rng, -1, 2));
        return ref(pick_of(rng, vis));
    };
    auto guard = [&](const std::vector<GenVar>& vis) -> std::string {
        static const std::vector<std::string> cmp{"==", "!=", "<", "<=", ">", ">="};
        std::string g = operand(vis) + " " + pick_of(rng, cmp) + " " + operand(vis);
        if (coin(rng, 0.25)) g = "(" + g + ") " + (coin(rng) ? "&&" : "||") + " (" + operand(vis) + " == " + operand(vis) + ")";
        if (coin(rng, 0.1)) g = "!(" + g + ")";
        return g;
    };
    auto rhs = [&](const std::vector<GenVar>& vis) -> std::string {
        switch (pick(rng, 0, 4)) {
            case 0: return std::to_string(pick(rng, -1, 2));
            case 1: return operand(vis) + " + 1";
            case 2: return operand(vis) + " - " + operand(vis);
            case 3: return "(" + operand(vis) + " + " + operand(vis) + ") % 3";
            default: return operand(vis);
        }
    };

    std::ostringstream out;
    out << "system {\n";
    for (const auto& v : vars)
        if (v.owner < 0) {
            out << "  var " << v.name;
            if (v.len) out << "[" << v.len << "]";
            out << " : " << v.lo << ".." << v.hi << " = " << pick(rng, v.lo, v.hi) << ";\n";
        }
    if (nchans) {
        out << "  chan ";
        for (int c = 0; c < nchans; ++c) out << (c ? ", " : "") << "c" << c;
        out << ";\n";
    }
    out << "}\n";
    for (int a = 0; a < nagents; ++a) {
        out << "agent A" << a << " {\n";
        for (const auto& v : vars)
            if (v.owner == a) {
                out << "  var " << v.name;
                if (v.len) out << "[" << v.len << "]";
                out << " : " << v.lo << ".." << v.hi << " = " << pick(rng, v.lo, v.hi) << ";\n";
            }
        const int nloc = pick(rng, 1, 4);
        out << "  loc ";
        for (int l = 0; l < nloc; ++l) out << (l ? ", " : "") << "l" << l;
        out << ";\n  init l0;\n";
        const auto vis = visible(a);
        const int nedges = pick(rng, 1, 5);
        for (int k = 0; k < nedges; ++k) {
            out << "  edge l" << pick(rng, 0, nloc - 1) << " -> l" << pick(rng, 0, nloc - 1);
            if (coin(rng, 0.6)) out << " [" << guard(vis) << "]";
            if (nchans && coin(rng, 0.4)) out << " sync(c" << pick(rng, 0, nchans - 1) << (coin(rng) ? "!" : "?") << ")";
            const int natoms = vis.empty() ? 0 : pick(rng, 0, 2);
            for (int t = 0; t < natoms; ++t) out << (t ? "; " : " do ") << ref(pick_of(rng, vis)) << " := " << rhs(vis);
            out << ";\n";
        }
        out << "}\n";
    }
    return out.str();
}

// A removal, merge or scoped mapping on one agent that owns locals; empty
// when no agent does.
inline std::vector<masabs::Mapping> random_mappings(Rng& rng, const masabs::MASGraph& mas) {
    using namespace masabs;
    std::vector<int> owners;
    for (std::size_t a = 0; a < mas.agents.size(); ++a)
        if (!mas.agents[a].vars.empty()) owners.push_back(static_cast<int>(a));
    if (owners.empty()) return {};
    const auto& ag = mas.agents[static_cast<std::size_t>(pick_of(rng, owners))];
    std::vector<std::string> locals;
    for (const auto& v : ag.vars) locals.push_back(v.name);
    std::shuffle(locals.begin(), locals.end(), rng);
    const int nsrc = pick(rng, 1, static_cast<int>(locals.size()));

    Mapping m;
    m.agent = ag.name;
    m.sources.assign(locals.begin(), locals.begin() + nsrc);
    const int kind = pick(rng, 0, 2);  // removal, merge, scoped
    if (kind >= 1 && coin(rng, 0.8)) {
        static const std::vector<std::string> fns{"identity", "sum", "parity", "constant:0", "bucket:2"};
        std::string fn = pick_of(rng, fns);
        int cells = 0;
        for (const auto& s : m.sources) cells += mas.find_var(s)->cells();
        if (fn == "identity" && cells != 1) fn = "sum";
        VarDecl z;
        z.name = ag.name + ".z";
        z.lo = 1;
        z.hi = 0;
        m.target = z;
        m.fn = builtin_fn(mas, m.sources, fn);
    }
    if (kind == 2) {
        std::vector<std::string> scope;
        for (const auto& l : ag.locations)
            if (coin(rng)) scope.push_back(l);
        m.scope = scope;
        if (coin(rng, 0.3)) {
            std::vector<int> reset;
            for (const auto& s : m.sources) {
                const auto* d = mas.find_var(s);
                for (int c = 0; c < d->cells(); ++c) reset.push_back(pick(rng, d->lo, d->hi));
            }
            m.reset = reset;
        }
    }
    return {resolve_mapping(mas, m)};
}

// Universal formula of temporal depth <= depth over the given atoms.
inline masabs::FormulaPtr random_formula(Rng& rng, const std::vector<masabs::FormulaPtr>& atoms, int depth) {
    using namespace masabs;
    auto leaf = [&]() {
        auto a = pick_of(rng, atoms);
        return coin(rng, 0.3) ? fm::negate_atom(a) : a;
    };
    if (depth <= 0 || coin(rng, 0.2)) {
        if (coin(rng, 0.8)) return leaf();
        return coin(rng) ? fm::conj(leaf(), leaf()) : fm::disj(leaf(), leaf());
    }
    switch (pick(rng, 0, 5)) {
        case 0: return fm::ax(random_formula(rng, atoms, depth - 1));
        case 1: return fm::ag(random_formula(rng, atoms, depth - 1));
        case 2: return fm::af(random_formula(rng, atoms, depth - 1));
        case 3: return fm::au(random_formula(rng, atoms, depth - 1), random_formula(rng, atoms, depth - 1));
        case 4: return fm::conj(random_formula(rng, atoms, depth), random_formula(rng, atoms, depth - 1));
        default: return fm::disj(random_formula(rng, atoms, depth - 1), random_formula(rng, atoms, depth));
    }
}

// Sparse random model: mostly one successor per state, some with two or
// three, labels p0..p2 at random.
inline masabs::Model random_model(Rng& rng, int n) {
    std::vector<std::pair<int, int>> edges;
    for (int s = 0; s < n; ++s) {
        const int deg = coin(rng, 0.12) ? 0 : (coin(rng, 0.75) ? 1 : pick(rng, 2, 3));
        for (int k = 0; k < deg; ++k) edges.emplace_back(s, pick(rng, 0, n - 1));
    }
    std::map<std::string, std::vector<std::uint8_t>> labels;
    for (int p = 0; p < 3; ++p) {
        auto& l = labels["p" + std::to_string(p)];
        const double density = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
        for (int s = 0; s < n; ++s) l.push_back(coin(rng, density));
    }
    std::vector<int> init{0};
    if (n > 1 && coin(rng, 0.3)) init.push_back(pick(rng, 1, n - 1));
    return masabs::Model::build(n, edges, init, labels);
}

}  // namespace gen

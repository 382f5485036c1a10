#include "masabs/simulation.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_set>

namespace masabs {

namespace {

std::vector<std::vector<int>> predecessors(const Model& m) {
    std::vector<std::vector<int>> p(static_cast<std::size_t>(m.n));
    for (int s = 0; s < m.n; ++s)
        for (auto t : m.successors(s)) p[t].push_back(s);
    return p;
}

// Per-state key of location name and the values of `vars`.
std::vector<int> match_keys(const Model& m, const std::set<std::string>& vars,
                            std::map<std::vector<int>, int>& ids, std::map<std::string, int>& locs) {
    if (!m.has_payload()) throw DefectError("state matching needs a model with state payloads");
    std::vector<std::pair<int, int>> slots;  // (first slot, cells)
    for (const auto& v : vars) {
        const auto* d = m.layout.find(v);
        if (!d) throw DefectError("model has no variable '" + v + "'");
        slots.emplace_back(m.layout.offset(v), d->cells());
    }
    std::vector<int> keys(static_cast<std::size_t>(m.n));
    std::vector<int> key;
    for (int s = 0; s < m.n; ++s) {
        key.clear();
        const auto& ln = m.loc_names[static_cast<std::size_t>(m.loc[static_cast<std::size_t>(s)])];
        key.push_back(locs.emplace(ln, static_cast<int>(locs.size())).first->second);
        const auto val = m.valuation(s);
        for (auto [o, c] : slots)
            for (int i = 0; i < c; ++i) key.push_back(val[static_cast<std::size_t>(o + i)]);
        keys[static_cast<std::size_t>(s)] = ids.emplace(key, static_cast<int>(ids.size())).first->second;
    }
    return keys;
}

}  // namespace

SimulationResult greatest_simulation(const Model& a, const Model& b, const Compat& compat) {
    const auto n1 = static_cast<std::size_t>(a.n), n2 = static_cast<std::size_t>(b.n);
    if (n1 * n2 > (std::size_t{1} << 28))
        throw ResourceError("simulation check over " + std::to_string(n1) + " x " + std::to_string(n2) + " pairs",
                            UnwrapStats{});
    auto at = [&](std::size_t s1, std::size_t s2) { return s1 * n2 + s2; };
    std::vector<std::uint8_t> rel(n1 * n2, 0);
    for (std::size_t s1 = 0; s1 < n1; ++s1)
        for (std::size_t s2 = 0; s2 < n2; ++s2) rel[at(s1, s2)] = compat(static_cast<int>(s1), static_cast<int>(s2));

    // cnt[(t1, s2)] = successors t2 of s2 with (t1, t2) still related
    std::vector<std::uint32_t> cnt(n1 * n2, 0);
    for (std::size_t s2 = 0; s2 < n2; ++s2)
        for (auto t2 : b.successors(static_cast<int>(s2)))
            for (std::size_t t1 = 0; t1 < n1; ++t1)
                if (rel[at(t1, t2)]) ++cnt[at(t1, s2)];

    const auto pa = predecessors(a), pb = predecessors(b);
    std::deque<std::pair<std::uint32_t, std::uint32_t>> removed;
    auto remove = [&](std::size_t s1, std::size_t s2) {
        if (!rel[at(s1, s2)]) return;
        rel[at(s1, s2)] = 0;
        removed.emplace_back(static_cast<std::uint32_t>(s1), static_cast<std::uint32_t>(s2));
    };
    for (std::size_t s1 = 0; s1 < n1; ++s1)
        for (auto t1 : a.successors(static_cast<int>(s1)))
            for (std::size_t s2 = 0; s2 < n2; ++s2)
                if (cnt[at(t1, s2)] == 0) remove(s1, s2);
    while (!removed.empty()) {
        const auto [t1, t2] = removed.front();
        removed.pop_front();
        for (int s2 : pb[t2]) {
            if (--cnt[at(t1, static_cast<std::size_t>(s2))] != 0) continue;
            for (int s1 : pa[t1]) remove(static_cast<std::size_t>(s1), static_cast<std::size_t>(s2));
        }
    }

    SimulationResult r;
    for (std::size_t s1 = 0; s1 < n1; ++s1)
        for (std::size_t s2 = 0; s2 < n2; ++s2)
            if (rel[at(s1, s2)]) r.relation.emplace_back(static_cast<int>(s1), static_cast<int>(s2));
    r.found = true;
    for (int s1 : a.initial) {
        const bool ok = std::any_of(b.initial.begin(), b.initial.end(),
                                    [&](int s2) { return rel[at(static_cast<std::size_t>(s1), static_cast<std::size_t>(s2))]; });
        if (ok) continue;
        r.found = false;
        r.blocked_left = s1;
        if (b.initial.empty()) {
            r.reason = "right model has no initial state";
            break;
        }
        const int s2 = b.initial.front();
        r.blocked_right = s2;
        if (!compat(s1, s2)) {
            r.reason = "initial states disagree on the observed propositions";
            break;
        }
        for (auto t1 : a.successors(s1)) {
            const auto ts = b.successors(s2);
            if (std::none_of(ts.begin(), ts.end(), [&](auto t2) { return rel[at(t1, t2)] != 0; })) {
                r.unmatched_move = static_cast<int>(t1);
                break;
            }
        }
        r.reason = "move to state " + std::to_string(r.unmatched_move) + " cannot be matched";
        break;
    }
    if (!r.found) r.relation.clear();
    return r;
}

Compat state_match(const Model& a, const Model& b, const std::set<std::string>& vars) {
    std::map<std::vector<int>, int> ids;
    std::map<std::string, int> locs;
    auto ka = std::make_shared<std::vector<int>>(match_keys(a, vars, ids, locs));
    auto kb = std::make_shared<std::vector<int>>(match_keys(b, vars, ids, locs));
    return [ka, kb](int s1, int s2) { return (*ka)[static_cast<std::size_t>(s1)] == (*kb)[static_cast<std::size_t>(s2)]; };
}

SimulationResult check_simulation(const Model& a, const Model& b, const std::vector<std::string>& ap) {
    std::vector<const std::vector<std::uint8_t>*> la, lb;
    for (const auto& p : ap) {
        la.push_back(&a.prop(p));
        lb.push_back(&b.prop(p));
    }
    return greatest_simulation(a, b, [&](int s1, int s2) {
        for (std::size_t i = 0; i < la.size(); ++i)
            if ((*la[i])[static_cast<std::size_t>(s1)] != (*lb[i])[static_cast<std::size_t>(s2)]) return false;
        return true;
    });
}

SimulationResult check_simulation_vars(const Model& a, const Model& b, const std::set<std::string>& vars) {
    return greatest_simulation(a, b, state_match(a, b, vars));
}

bool check_state_match(const Model& a, int s1, const Model& b, int s2, const std::set<std::string>& vars) {
    if (a.loc_names[static_cast<std::size_t>(a.loc[static_cast<std::size_t>(s1)])] !=
        b.loc_names[static_cast<std::size_t>(b.loc[static_cast<std::size_t>(s2)])])
        return false;
    const auto va = a.valuation(s1), vb = b.valuation(s2);
    for (const auto& v : vars) {
        const auto* da = a.layout.find(v);
        const auto* db = b.layout.find(v);
        if (!da || !db) throw DefectError("model has no variable '" + v + "'");
        const int oa = a.layout.offset(v), ob = b.layout.offset(v);
        for (int i = 0; i < da->cells(); ++i)
            if (va[static_cast<std::size_t>(oa + i)] != vb[static_cast<std::size_t>(ob + i)]) return false;
    }
    return true;
}

std::string verify_simulation(const Model& a, const Model& b, const Compat& compat,
                              const std::vector<std::pair<int, int>>& relation) {
    struct PairHash {
        std::size_t operator()(const std::pair<int, int>& p) const {
            return std::hash<long long>()((static_cast<long long>(p.first) << 32) ^ static_cast<unsigned>(p.second));
        }
    };
    const std::unordered_set<std::pair<int, int>, PairHash> r(relation.begin(), relation.end());
    for (auto [s1, s2] : relation)
        if (!compat(s1, s2))
            return "pair (" + std::to_string(s1) + "," + std::to_string(s2) + ") disagrees on propositions";
    for (int s1 : a.initial) {
        bool ok = false;
        for (int s2 : b.initial) ok = ok || r.count({s1, s2});
        if (!ok) return "initial state " + std::to_string(s1) + " is not related to an initial state";
    }
    for (auto [s1, s2] : relation)
        for (auto t1 : a.successors(s1)) {
            bool ok = false;
            for (auto t2 : b.successors(s2)) ok = ok || r.count({static_cast<int>(t1), static_cast<int>(t2)});
            if (!ok)
                return "move " + std::to_string(s1) + "->" + std::to_string(t1) + " unmatched from " +
                       std::to_string(s2);
        }
    return {};
}

}  // namespace masabs

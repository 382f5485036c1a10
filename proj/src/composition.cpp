#include "masabs/composition.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

#include "masabs/eval.hpp"

namespace masabs {

int CombinedGraph::find_location(const std::vector<int>& tuple) const {
    auto it = std::lower_bound(locations.begin(), locations.end(), tuple);
    if (it == locations.end() || *it != tuple) return -1;
    return static_cast<int>(it - locations.begin());
}

std::string CombinedGraph::location_name(int l) const {
    std::string out = "<";
    const auto& t = locations[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) out += ",";
        out += agent_locations[i][static_cast<std::size_t>(t[i])];
    }
    return out + ">";
}

std::vector<std::string> CombinedGraph::location_props(int l) const {
    std::vector<std::string> out;
    const auto& t = locations[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < t.size(); ++i)
        out.push_back(agent_names[i] + "." + agent_locations[i][static_cast<std::size_t>(t[i])]);
    return out;
}

std::vector<std::vector<int>> CombinedGraph::out_edges() const {
    std::vector<std::vector<int>> out(locations.size());
    for (std::size_t i = 0; i < edges.size(); ++i) out[static_cast<std::size_t>(edges[i].src)].push_back(static_cast<int>(i));
    return out;
}

namespace {

using Emit = std::function<void(std::vector<int> dst, CombinedEdge proto)>;

// Joint moves out of one location tuple, in canonical order: interleavings
// by (agent, edge), then synchronised pairs by (sender agent, sender edge,
// receiver agent, receiver edge).
void moves_from(const MASGraph& mas, const std::vector<int>& tuple, const Emit& emit) {
    const auto n = mas.agents.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = mas.agents[i];
        for (std::size_t k = 0; k < a.edges.size(); ++k) {
            const auto& e = a.edges[k];
            if (e.src != tuple[i] || e.sync.kind != SyncKind::None) continue;
            auto dst = tuple;
            dst[i] = e.dst;
            CombinedEdge ce;
            ce.guard = e.guard;
            ce.update = e.update;
            ce.provenance = {{static_cast<int>(i), static_cast<int>(k)}};
            emit(std::move(dst), std::move(ce));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = mas.agents[i];
        for (std::size_t k = 0; k < a.edges.size(); ++k) {
            const auto& s = a.edges[k];
            if (s.src != tuple[i] || s.sync.kind != SyncKind::Send) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const auto& b = mas.agents[j];
                for (std::size_t m = 0; m < b.edges.size(); ++m) {
                    const auto& r = b.edges[m];
                    if (r.src != tuple[j] || r.sync.kind != SyncKind::Recv || r.sync.channel != s.sync.channel)
                        continue;
                    auto dst = tuple;
                    dst[i] = s.dst;
                    dst[j] = r.dst;
                    CombinedEdge ce;
                    ce.guard = ex::conj(s.guard, r.guard);
                    ce.update = s.update;
                    ce.update.insert(ce.update.end(), r.update.begin(), r.update.end());
                    ce.provenance = {{static_cast<int>(i), static_cast<int>(k)}, {static_cast<int>(j), static_cast<int>(m)}};
                    emit(std::move(dst), std::move(ce));
                }
            }
        }
    }
}

void dangling_sends(const MASGraph& mas, std::vector<std::string>* warnings) {
    if (!warnings) return;
    for (std::size_t i = 0; i < mas.agents.size(); ++i) {
        for (const auto& e : mas.agents[i].edges) {
            if (e.sync.kind != SyncKind::Send) continue;
            bool found = false;
            for (std::size_t j = 0; j < mas.agents.size() && !found; ++j) {
                if (j == i) continue;
                for (const auto& r : mas.agents[j].edges)
                    if (r.sync.kind == SyncKind::Recv && r.sync.channel == e.sync.channel) found = true;
            }
            if (!found) {
                const std::string w = "channel '" + e.sync.channel + "' sent by " + mas.agents[i].name + " has no receiver";
                if (std::find(warnings->begin(), warnings->end(), w) == warnings->end()) warnings->push_back(w);
            }
        }
    }
}

CombinedGraph skeleton(const MASGraph& mas) {
    CombinedGraph g;
    for (const auto& a : mas.agents) {
        g.agent_names.push_back(a.name);
        g.agent_locations.push_back(a.locations);
    }
    g.vars = mas.all_vars();
    g.g0 = mas.initial_condition();
    return g;
}

std::vector<int> initial_tuple(const MASGraph& mas) {
    std::vector<int> t;
    for (const auto& a : mas.agents) t.push_back(a.initial);
    return t;
}

void fill_edges(const MASGraph& mas, CombinedGraph& g) {
    for (std::size_t l = 0; l < g.locations.size(); ++l) {
        moves_from(mas, g.locations[l], [&](std::vector<int> dst, CombinedEdge ce) {
            ce.src = static_cast<int>(l);
            ce.dst = g.find_location(dst);
            if (ce.dst >= 0) g.edges.push_back(std::move(ce));
        });
    }
}

}  // namespace

CombinedGraph combine(const MASGraph& mas, std::vector<std::string>* warnings) {
    dangling_sends(mas, warnings);
    CombinedGraph g = skeleton(mas);
    std::vector<std::pair<int, int>> ranges;
    for (const auto& a : mas.agents) ranges.emplace_back(0, static_cast<int>(a.locations.size()) - 1);
    for_each_valuation(ranges, [&](const std::vector<int>& t) { g.locations.push_back(t); });
    g.initial = g.find_location(initial_tuple(mas));
    fill_edges(mas, g);
    return g;
}

CombinedGraph restrict_to_reachable_locations(const CombinedGraph& g) {
    std::vector<std::vector<int>> succ(g.locations.size());
    for (const auto& e : g.edges) succ[static_cast<std::size_t>(e.src)].push_back(e.dst);
    std::vector<char> seen(g.locations.size(), 0);
    std::deque<int> q{g.initial};
    seen[static_cast<std::size_t>(g.initial)] = 1;
    while (!q.empty()) {
        const int l = q.front();
        q.pop_front();
        for (int m : succ[static_cast<std::size_t>(l)])
            if (!seen[static_cast<std::size_t>(m)]) {
                seen[static_cast<std::size_t>(m)] = 1;
                q.push_back(m);
            }
    }
    CombinedGraph out;
    out.agent_names = g.agent_names;
    out.agent_locations = g.agent_locations;
    out.vars = g.vars;
    out.g0 = g.g0;
    std::vector<int> remap(g.locations.size(), -1);
    for (std::size_t l = 0; l < g.locations.size(); ++l) {
        if (!seen[l]) continue;
        remap[l] = static_cast<int>(out.locations.size());
        out.locations.push_back(g.locations[l]);
    }
    out.initial = remap[static_cast<std::size_t>(g.initial)];
    for (const auto& e : g.edges) {
        if (!seen[static_cast<std::size_t>(e.src)]) continue;
        CombinedEdge ce = e;
        ce.src = remap[static_cast<std::size_t>(e.src)];
        ce.dst = remap[static_cast<std::size_t>(e.dst)];
        out.edges.push_back(std::move(ce));
    }
    return out;
}

CombinedGraph combine_reachable(const MASGraph& mas, std::vector<std::string>* warnings) {
    dangling_sends(mas, warnings);
    CombinedGraph g = skeleton(mas);
    std::set<std::vector<int>> seen;
    std::deque<std::vector<int>> q;
    const auto init = initial_tuple(mas);
    seen.insert(init);
    q.push_back(init);
    while (!q.empty()) {
        auto t = std::move(q.front());
        q.pop_front();
        moves_from(mas, t, [&](std::vector<int> dst, CombinedEdge) {
            if (seen.insert(dst).second) q.push_back(std::move(dst));
        });
    }
    g.locations.assign(seen.begin(), seen.end());
    g.initial = g.find_location(init);
    fill_edges(mas, g);
    return g;
}

}  // namespace masabs

#include "masabs/domains.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <unordered_set>

#include <json.hpp>

#include "masabs/eval.hpp"

namespace masabs {

std::vector<int> reachability_index(const CombinedGraph& g) {
    const auto n = static_cast<std::size_t>(g.location_count());
    const std::size_t words = (n + 63) / 64;
    std::vector<std::uint64_t> reach(n * words, 0);
    auto row = [&](std::size_t i) { return reach.data() + i * words; };
    for (const auto& e : g.edges) row(static_cast<std::size_t>(e.src))[static_cast<std::size_t>(e.dst) / 64] |= 1ull << (e.dst % 64);
    // Warshall: i reaches j through k
    for (std::size_t k = 0; k < n; ++k) {
        const auto* rk = row(k);
        for (std::size_t i = 0; i < n; ++i) {
            auto* ri = row(i);
            if (ri[k / 64] >> (k % 64) & 1)
                for (std::size_t w = 0; w < words; ++w) ri[w] |= rk[w];
        }
    }
    std::vector<int> r(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int c = 0;
        for (std::size_t w = 0; w < words; ++w) c += __builtin_popcountll(row(i)[w]);
        if (row(i)[i / 64] >> (i % 64) & 1) --c;
        r[i] = c;
    }
    return r;
}

namespace {

struct VecHash {
    std::size_t operator()(const ValueVec& v) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (int x : v) {
            h ^= static_cast<std::uint32_t>(x);
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

std::vector<VarDecl> decls_for(const CombinedGraph& g, const std::vector<std::string>& names) {
    std::vector<VarDecl> out;
    for (const auto& n : names) {
        auto it = std::find_if(g.vars.begin(), g.vars.end(), [&](const VarDecl& v) { return v.name == n; });
        if (it == g.vars.end()) throw ValidationError("unknown variable '" + n + "' in domain request");
        if (std::none_of(out.begin(), out.end(), [&](const VarDecl& v) { return v.name == n; })) out.push_back(*it);
    }
    std::sort(out.begin(), out.end(), [](const VarDecl& a, const VarDecl& b) { return a.name < b.name; });
    return out;
}

std::vector<ExprPtr> conjuncts(const ExprPtr& g) {
    if (g->kind == ExprKind::Binary && g->op == BinOp::And) {
        auto a = conjuncts(g->kids[0]);
        auto b = conjuncts(g->kids[1]);
        a.insert(a.end(), b.begin(), b.end());
        return a;
    }
    return {g};
}

double box_size(const Layout& lay, const std::vector<int>& slots) {
    double n = 1;
    for (int s : slots) n *= lay.slot_hi(s) - lay.slot_lo(s) + 1;
    return n;
}

// Precomputed evaluation of one edge's image restricted to the tracked variables.
struct EdgePlan {
    bool dead = false;    // guard unsatisfiable
    bool coarse = false;  // image bounded by "written cells take any value"
    Layout lay;
    std::vector<int> v_slots;  // tracked cells, in tracked-layout order
    std::vector<int> x_slots;  // enumerated non-tracked cells
    std::vector<std::pair<int, int>> x_ranges;
    Valuation base;
    Code guard;
    CompiledUpdate update;
    std::vector<int> written;  // coarse mode: tracked-vector positions that may change
    std::vector<std::pair<int, int>> written_ranges;
    std::map<ValueVec, VecSet> cache;
};

EdgePlan make_plan(const CombinedGraph& g, const CombinedEdge& e, const std::vector<VarDecl>& tracked,
                   std::size_t budget) {
    EdgePlan p;
    std::set<std::string> vnames;
    for (const auto& v : tracked) vnames.insert(v.name);

    // backward slice of the atoms that determine the tracked post-values
    std::set<std::string> needed = vnames;
    std::vector<bool> in_slice(e.update.size(), false);
    for (std::size_t i = e.update.size(); i-- > 0;) {
        const auto& a = e.update[i];
        if (!needed.count(a.lhs->name)) continue;
        in_slice[i] = true;
        for (const auto& k : a.lhs->kids) needed.merge(vars_of(k));
        needed.merge(vars_of(a.rhs));
    }
    Update sliced;
    for (std::size_t i = 0; i < e.update.size(); ++i)
        if (in_slice[i]) sliced.push_back(e.update[i]);

    // guard conjuncts connected to the tracked / slice variables
    auto cs = conjuncts(e.guard);
    std::vector<bool> kept(cs.size(), false);
    std::set<std::string> evars = needed;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (kept[i]) continue;
            const auto vs = vars_of(cs[i]);
            if (vs.empty() || std::any_of(vs.begin(), vs.end(), [&](const std::string& v) { return evars.count(v) > 0; })) {
                kept[i] = true;
                evars.insert(vs.begin(), vs.end());
                changed = true;
            }
        }
    }
    auto build = [&](const std::set<std::string>& names) {
        std::vector<std::string> nv(names.begin(), names.end());
        p.lay = Layout(decls_for(g, nv));
        p.x_slots.clear();
        p.v_slots.clear();
        for (const auto& v : tracked)
            for (int c = 0; c < v.cells(); ++c) p.v_slots.push_back(p.lay.offset(v.name) + c);
        for (int s = 0; s < p.lay.slot_count(); ++s)
            if (std::find(p.v_slots.begin(), p.v_slots.end(), s) == p.v_slots.end()) p.x_slots.push_back(s);
    };
    build(evars);
    if (box_size(p.lay, p.x_slots) > static_cast<double>(budget)) {
        // keep only conjuncts that lie inside the slice variables
        evars = needed;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const auto vs = vars_of(cs[i]);
            kept[i] = std::all_of(vs.begin(), vs.end(), [&](const std::string& v) { return needed.count(v) > 0; });
        }
        build(evars);
    }
    if (box_size(p.lay, p.x_slots) > static_cast<double>(budget)) {
        p.coarse = true;
        const auto w = writes_of(e.update);
        int pos = 0;
        for (const auto& v : tracked)
            for (int c = 0; c < v.cells(); ++c, ++pos)
                if (w.count(v.name)) {
                    p.written.push_back(pos);
                    p.written_ranges.emplace_back(v.lo, v.hi);
                }
        return p;
    }

    ExprPtr kept_guard = ex::truth(), dropped = ex::truth();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (kept[i]) kept_guard = ex::conj(kept_guard, cs[i]);
        else dropped = ex::conj(dropped, cs[i]);
    }
    if (!is_true_lit(dropped)) {
        const auto dv = vars_of(dropped);
        auto dd = decls_for(g, std::vector<std::string>(dv.begin(), dv.end()));
        const Layout dl(dd);
        std::vector<int> all(static_cast<std::size_t>(dl.slot_count()));
        for (int s = 0; s < dl.slot_count(); ++s) all[static_cast<std::size_t>(s)] = s;
        if (box_size(dl, all) <= static_cast<double>(budget) && sat(dropped, dd).empty()) p.dead = true;
    }
    p.base = p.lay.initial();
    for (int s : p.x_slots) p.x_ranges.emplace_back(p.lay.slot_lo(s), p.lay.slot_hi(s));
    p.guard = Code(kept_guard, p.lay);
    p.update = CompiledUpdate(sliced, p.lay);
    return p;
}

const VecSet& plan_image(EdgePlan& p, const ValueVec& c, std::size_t& evals) {
    auto it = p.cache.find(c);
    if (it != p.cache.end()) return it->second;
    VecSet out;
    if (p.dead) {
        // no image
    } else if (p.coarse) {
        std::vector<std::pair<int, int>> ranges = p.written_ranges;
        for_each_valuation(ranges, [&](const std::vector<int>& w) {
            ValueVec v = c;
            for (std::size_t i = 0; i < w.size(); ++i) v[static_cast<std::size_t>(p.written[i])] = w[i];
            out.insert(std::move(v));
        });
    } else {
        Valuation val = p.base;
        for (std::size_t i = 0; i < c.size(); ++i) val[static_cast<std::size_t>(p.v_slots[i])] = c[i];
        Valuation next;
        ValueVec proj(c.size());
        for_each_valuation(p.x_ranges, [&](const std::vector<int>& x) {
            for (std::size_t i = 0; i < x.size(); ++i) val[static_cast<std::size_t>(p.x_slots[i])] = x[i];
            ++evals;
            if (!p.guard.holds(val)) return;
            next = val;
            if (!p.update.apply(next)) return;
            for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = next[static_cast<std::size_t>(p.v_slots[i])];
            out.insert(proj);
        });
    }
    return p.cache.emplace(c, std::move(out)).first->second;
}

ValueVec initial_vector(const std::vector<VarDecl>& tracked) {
    ValueVec v;
    for (const auto& d : tracked)
        for (int c = 0; c < d.cells(); ++c) v.push_back(d.init.at(static_cast<std::size_t>(c)));
    return v;
}

// Worklist keyed by reachability index (descending), ties by first enqueue.
class Worklist {
public:
    Worklist(std::vector<int> prio, bool fifo) : prio_(std::move(prio)), fifo_(fifo), queued_(prio_.size(), 0) {}
    void push(int l) {
        if (queued_[static_cast<std::size_t>(l)]) return;
        queued_[static_cast<std::size_t>(l)] = 1;
        q_.emplace(fifo_ ? 0 : -prio_[static_cast<std::size_t>(l)], seq_++, l);
    }
    bool empty() const { return q_.empty(); }
    int pop() {
        auto [p, s, l] = *q_.begin();
        q_.erase(q_.begin());
        queued_[static_cast<std::size_t>(l)] = 0;
        return l;
    }

private:
    std::vector<int> prio_;
    bool fifo_;
    std::vector<char> queued_;
    std::set<std::tuple<int, std::size_t, int>> q_;
    std::size_t seq_ = 0;
};

LocalDomain upper_domain(const CombinedGraph& g, const std::vector<VarDecl>& tracked, const DomainOptions& opts) {
    LocalDomain d;
    d.mode = DomainMode::Upper;
    d.vars = tracked;
    const auto n = static_cast<std::size_t>(g.location_count());
    d.table.assign(n, {});
    std::vector<EdgePlan> plans;
    plans.reserve(g.edges.size());
    for (const auto& e : g.edges) {
        plans.push_back(make_plan(g, e, tracked, opts.enum_budget));
        d.coarse |= plans.back().coarse;
    }
    std::vector<std::vector<int>> in_edges(n), self_loops(n), succ(n);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        if (e.src == e.dst) self_loops[static_cast<std::size_t>(e.src)].push_back(static_cast<int>(i));
        else in_edges[static_cast<std::size_t>(e.dst)].push_back(static_cast<int>(i));
        auto& s = succ[static_cast<std::size_t>(e.src)];
        if (std::find(s.begin(), s.end(), e.dst) == s.end()) s.push_back(e.dst);
    }
    enum Color : char { White, Grey, Black };
    std::vector<Color> color(n, White);
    std::vector<std::set<int>> preds(n);

    auto absorb = [&](int edge, std::size_t l) {
        auto& p = plans[static_cast<std::size_t>(edge)];
        const auto src = static_cast<std::size_t>(g.edges[static_cast<std::size_t>(edge)].src);
        // the source table may grow while we iterate when src == l
        const std::vector<ValueVec> from(d.table[src].begin(), d.table[src].end());
        for (const auto& c : from) {
            ++d.edge_images;
            const auto& img = plan_image(p, c, d.edge_images);
            d.table[l].insert(img.begin(), img.end());
        }
    };

    d.table[static_cast<std::size_t>(g.initial)].insert(initial_vector(tracked));
    Worklist q(reachability_index(g), opts.fifo);
    q.push(g.initial);
    while (!q.empty()) {
        const auto l = static_cast<std::size_t>(q.pop());
        ++d.visits;
        const auto before = d.table[l].size();
        for (int e : in_edges[l])
            if (preds[l].count(g.edges[static_cast<std::size_t>(e)].src)) absorb(e, l);
        preds[l].clear();
        if (d.table[l].size() != before) color[l] = Grey;
        while (true) {
            const auto mid = d.table[l].size();
            for (int e : self_loops[l]) absorb(e, l);
            if (d.table[l].size() == mid) break;
            color[l] = Grey;
        }
        if (color[l] != Black) {
            for (int m : succ[l]) {
                if (static_cast<std::size_t>(m) == l) continue;
                q.push(m);
                preds[static_cast<std::size_t>(m)].insert(static_cast<int>(l));
            }
            color[l] = Black;
        }
    }
    return d;
}

// Lower mode: exact exploration of every variable any edge reads, plus the
// tracked ones. Writes to never-read variables cannot influence control flow,
// so the projection onto the tracked set is the exact reachable projection
// whenever the exploration completes.
LocalDomain lower_domain(const CombinedGraph& g, const std::vector<VarDecl>& tracked, const DomainOptions& opts) {
    LocalDomain d;
    d.mode = DomainMode::Lower;
    d.vars = tracked;
    const auto n = static_cast<std::size_t>(g.location_count());
    d.table.assign(n, {});

    std::set<std::string> unames;
    for (const auto& v : tracked) unames.insert(v.name);
    for (const auto& e : g.edges) {
        unames.merge(vars_of(e.guard));
        unames.merge(reads_of(e.update));
    }
    const Layout full(g.vars);
    std::vector<int> u_slots;  // full-layout slots of the explored cells
    for (const auto& name : unames) {
        const auto* v = full.find(name);
        for (int c = 0; c < v->cells(); ++c) u_slots.push_back(full.offset(name) + c);
    }
    std::sort(u_slots.begin(), u_slots.end());
    std::vector<int> v_pos;  // positions of the tracked cells within an explored vector
    for (const auto& v : tracked)
        for (int c = 0; c < v.cells(); ++c)
            v_pos.push_back(static_cast<int>(std::lower_bound(u_slots.begin(), u_slots.end(), full.offset(v.name) + c) - u_slots.begin()));

    struct CEdge {
        int dst;
        Code guard;
        CompiledUpdate update;
    };
    std::vector<std::vector<CEdge>> out(n);
    for (const auto& e : g.edges)
        out[static_cast<std::size_t>(e.src)].push_back({e.dst, Code(e.guard, full), CompiledUpdate(e.update, full)});

    std::vector<std::unordered_set<ValueVec, VecHash>> seen(n);
    std::vector<std::vector<ValueVec>> pending(n);
    std::size_t stored = 0;
    const Valuation base = full.initial();
    auto project = [&](const Valuation& val) {
        ValueVec u(u_slots.size());
        for (std::size_t i = 0; i < u_slots.size(); ++i) u[i] = val[static_cast<std::size_t>(u_slots[i])];
        return u;
    };
    auto add = [&](std::size_t l, ValueVec u) {
        if (seen[l].insert(u).second) {
            pending[l].push_back(std::move(u));
            ++stored;
        }
    };
    add(static_cast<std::size_t>(g.initial), project(base));
    Worklist q(reachability_index(g), opts.fifo);
    q.push(g.initial);
    Valuation val = base, next;
    while (!q.empty() && d.complete) {
        const auto l = static_cast<std::size_t>(q.pop());
        ++d.visits;
        while (!pending[l].empty() && d.complete) {
            auto batch = std::move(pending[l]);
            pending[l].clear();
            for (const auto& u : batch) {
                for (std::size_t i = 0; i < u_slots.size(); ++i) val[static_cast<std::size_t>(u_slots[i])] = u[i];
                for (const auto& e : out[l]) {
                    ++d.edge_images;
                    if (!e.guard.holds(val)) continue;
                    next = val;
                    if (!e.update.apply(next)) continue;
                    const auto dst = static_cast<std::size_t>(e.dst);
                    add(dst, project(next));
                    if (dst != l) q.push(e.dst);
                }
                if (stored > opts.lower_budget) {
                    d.complete = false;
                    break;
                }
            }
        }
    }
    for (std::size_t l = 0; l < n; ++l)
        for (const auto& u : seen[l]) {
            ValueVec v(v_pos.size());
            for (std::size_t i = 0; i < v_pos.size(); ++i) v[i] = u[static_cast<std::size_t>(v_pos[i])];
            d.table[l].insert(std::move(v));
        }
    return d;
}

}  // namespace

LocalDomain approx_local_domain(const CombinedGraph& g, const std::vector<std::string>& vars, DomainMode mode,
                                const DomainOptions& opts) {
    const auto tracked = decls_for(g, vars);
    return mode == DomainMode::Upper ? upper_domain(g, tracked, opts) : lower_domain(g, tracked, opts);
}

NarrowedDomain narrow(const LocalDomain& d, const CombinedGraph& g, int agent) {
    NarrowedDomain out;
    out.agent = agent;
    out.mode = d.mode;
    out.vars = d.vars;
    out.complete = d.complete;
    out.table.assign(g.agent_locations[static_cast<std::size_t>(agent)].size(), {});
    for (int l = 0; l < g.location_count(); ++l) {
        const auto li = static_cast<std::size_t>(g.locations[static_cast<std::size_t>(l)][static_cast<std::size_t>(agent)]);
        const auto& src = d.table[static_cast<std::size_t>(l)];
        out.table[li].insert(src.begin(), src.end());
    }
    return out;
}

LocalDomain template_domain(const MASGraph& mas, int agent, const std::vector<std::string>& vars, DomainMode mode,
                            const DomainOptions& opts) {
    MASGraph t;
    t.shared = mas.shared;
    t.channels = mas.channels;
    t.tables = mas.tables;
    AgentGraph a = mas.agents.at(static_cast<std::size_t>(agent));
    std::vector<Edge> kept;
    for (auto& e : a.edges) {
        if (e.sync.kind == SyncKind::None) {
            kept.push_back(e);
        } else if (mode == DomainMode::Upper) {
            e.sync = {};
            kept.push_back(e);
        }
    }
    a.edges = std::move(kept);
    t.agents.push_back(std::move(a));
    return approx_local_domain(combine(t), vars, mode, opts);
}

VecSet edge_image(const CombinedGraph& g, const CombinedEdge& e, const LocalDomain& d, const DomainOptions& opts) {
    auto p = make_plan(g, e, d.vars, opts.enum_budget);
    VecSet out;
    std::size_t evals = 0;
    for (const auto& c : d.table[static_cast<std::size_t>(e.src)]) {
        const auto& img = plan_image(p, c, evals);
        out.insert(img.begin(), img.end());
    }
    return out;
}

bool is_stable(const CombinedGraph& g, const LocalDomain& d, const DomainOptions& opts) {
    for (const auto& e : g.edges) {
        const auto img = edge_image(g, e, d, opts);
        const auto& dst = d.table[static_cast<std::size_t>(e.dst)];
        for (const auto& v : img)
            if (!dst.count(v)) return false;
    }
    return true;
}

std::string domain_to_json(const LocalDomain& d, const CombinedGraph& g) {
    nlohmann::json j;
    j["mode"] = d.mode == DomainMode::Upper ? "upper" : "lower";
    std::vector<std::string> names;
    for (const auto& v : d.vars) names.push_back(v.name);
    j["vars"] = names;
    j["complete"] = d.complete;
    auto r = reachability_index(g);
    nlohmann::json locs = nlohmann::json::array();
    for (int l = 0; l < g.location_count(); ++l) {
        nlohmann::json e;
        e["location"] = g.location_name(l);
        e["r"] = r[static_cast<std::size_t>(l)];
        e["values"] = std::vector<ValueVec>(d.table[static_cast<std::size_t>(l)].begin(), d.table[static_cast<std::size_t>(l)].end());
        locs.push_back(e);
    }
    j["locations"] = locs;
    return j.dump(1);
}

}  // namespace masabs

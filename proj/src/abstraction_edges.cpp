// Edge instantiation for abstract_mas and the per-agent transformations.

#include <algorithm>
#include <chrono>
#include <map>
#include <sstream>

#include "masabs/abstraction.hpp"
#include "masabs/eval.hpp"

namespace masabs {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct MapInfo {
    Mapping m;
    std::vector<VarDecl> src;
    std::vector<int> dpos;  // per cell: position in the domain vector
    std::vector<int> init;
    std::vector<char> in_scope;  // per agent location
    bool global = true;          // no scope: sources disappear from the agent
    int ncells() const { return static_cast<int>(init.size()); }
    bool targeted() const { return m.target.has_value(); }
};

std::vector<ExprPtr> cell_refs(const std::vector<VarDecl>& src) {
    std::vector<ExprPtr> out;
    for (const auto& v : src) {
        if (!v.is_array()) out.push_back(ex::var(v.name));
        else
            for (int c = 0; c < v.length; ++c) out.push_back(ex::index(v.name, ex::integer(v.index_lo + c)));
    }
    return out;
}

std::vector<Binding> bind_cells(const std::vector<VarDecl>& src, const std::vector<int>& cells) {
    std::vector<Binding> out;
    std::size_t k = 0;
    for (const auto& v : src) {
        Binding b;
        b.name = v.name;
        b.index_lo = v.index_lo;
        b.is_array = v.is_array();
        for (int c = 0; c < v.cells(); ++c) b.values.push_back(cells[k++]);
        out.push_back(std::move(b));
    }
    return out;
}

int apply_fn(const TablePtr& fn, const std::vector<int>& cells) {
    const auto idx = fn->index_of(std::vector<std::int64_t>(cells.begin(), cells.end()));
    return fn->values.at(static_cast<std::size_t>(idx));
}

std::string vec_text(const std::vector<int>& v) {
    std::ostringstream s;
    s << "(";
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str() + ")";
}

bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::none_of(a.begin(), a.end(), [&](const std::string& x) { return b.count(x) > 0; });
}

// Value of a removed cell while walking an update.
struct Cell {
    enum Kind { Const, Pre, Unknown } kind = Const;
    int value = 0;
    ExprPtr pre;  // Pre: expression over the pre-state giving the value
};

struct Variant {
    ExprPtr guard;
    Update body;
    std::map<std::string, std::vector<Cell>> cells;  // globally removed sources of the edge
    std::set<std::string> written;                   // retained variables assigned so far
};

constexpr std::size_t kMaxVariants = std::size_t{1} << 16;

class Instantiator {
public:
    explicit Instantiator(const std::vector<MapInfo>& maps) : maps_(maps) {}

    std::size_t forks = 0;

    // One edge with the sources of the mappings in R fixed to c (concatenated cells).
    std::vector<Variant> run(const Edge& e, const std::vector<int>& R, const std::vector<int>& E, const std::vector<int>& c) {
        std::vector<Binding> all, scoped;
        std::size_t off = 0;
        std::vector<std::vector<int>> per(maps_.size());
        for (int i : R) {
            const auto& mi = maps_[static_cast<std::size_t>(i)];
            per[static_cast<std::size_t>(i)].assign(c.begin() + static_cast<long>(off), c.begin() + static_cast<long>(off) + mi.ncells());
            off += static_cast<std::size_t>(mi.ncells());
            auto bs = bind_cells(mi.src, per[static_cast<std::size_t>(i)]);
            all.insert(all.end(), bs.begin(), bs.end());
            if (!mi.global) scoped.insert(scoped.end(), bs.begin(), bs.end());
        }
        scoped_ = scoped;

        Variant v0;
        v0.guard = fold(substitute(e.guard, all));
        for (int i : R) {
            const auto& mi = maps_[static_cast<std::size_t>(i)];
            if (mi.targeted())
                v0.guard = ex::conj(v0.guard, ex::eq(ex::var(mi.m.target->name),
                                                     ex::integer(apply_fn(mi.m.fn, per[static_cast<std::size_t>(i)]))));
            if (mi.global) {
                std::size_t k = 0;
                for (const auto& s : mi.src) {
                    auto& cells = v0.cells[s.name];
                    for (int q = 0; q < s.cells(); ++q) cells.push_back({Cell::Const, per[static_cast<std::size_t>(i)][k++], nullptr});
                }
            }
        }
        v0.guard = fold(v0.guard);
        if (is_false_lit(v0.guard)) return {};

        std::vector<Variant> cur{std::move(v0)};
        for (const auto& atom : e.update) {
            std::vector<Variant> next;
            for (auto& v : cur) step(std::move(v), atom, next);
            cur = std::move(next);
            if (cur.size() > kMaxVariants) throw AbstractionError("edge instance splits into too many variants");
        }

        std::vector<Variant> out;
        for (auto& v : cur) {
            // targets of globally removed sources take fn of the final values
            std::vector<Variant> done{std::move(v)};
            for (int i : R) {
                const auto& mi = maps_[static_cast<std::size_t>(i)];
                if (!mi.global || !mi.targeted()) continue;
                std::vector<std::string> names;
                for (const auto& s : mi.src) names.push_back(s.name);
                done = materialize(std::move(done), names);
                for (auto& w : done) {
                    std::vector<int> vals;
                    for (const auto& s : mi.src)
                        for (const auto& cell : w.cells[s.name]) vals.push_back(cell.value);
                    w.body.push_back({ex::var(mi.m.target->name), ex::integer(apply_fn(mi.m.fn, vals))});
                }
            }
            for (auto& w : done) {
                Update pre;
                for (int i : R) {
                    const auto& mi = maps_[static_cast<std::size_t>(i)];
                    if (mi.global) continue;
                    const auto refs = cell_refs(mi.src);
                    for (std::size_t k = 0; k < refs.size(); ++k)
                        pre.push_back({refs[k], ex::integer(per[static_cast<std::size_t>(i)][k])});
                    leave_or_stay(mi, e.dst, w.body);
                }
                for (int i : E) leave_or_stay(maps_[static_cast<std::size_t>(i)], e.dst, w.body);
                pre.insert(pre.end(), w.body.begin(), w.body.end());
                w.body = std::move(pre);
                w.guard = fold(w.guard);
                if (!is_false_lit(w.guard)) out.push_back(std::move(w));
            }
        }
        return out;
    }

private:
    // Scoped mapping at the end of an edge: inside the target's scope the
    // target takes fn of the sources, which then reset; outside it takes the
    // outside value.
    void leave_or_stay(const MapInfo& mi, int dst, Update& body) const {
        const auto refs = cell_refs(mi.src);
        if (mi.in_scope[static_cast<std::size_t>(dst)]) {
            if (mi.targeted()) body.push_back({ex::var(mi.m.target->name), ex::lookup(mi.m.fn, refs)});
            for (std::size_t k = 0; k < refs.size(); ++k) body.push_back({refs[k], ex::integer((*mi.m.reset)[k])});
        } else if (mi.targeted()) {
            body.push_back({ex::var(mi.m.target->name), ex::integer(*mi.m.outside_default)});
        }
    }

    const VarDecl& removed_decl(const std::string& name) const {
        for (const auto& mi : maps_)
            for (const auto& s : mi.src)
                if (s.name == name) return s;
        throw AbstractionError("internal: no source named " + name);
    }

    // Expression over the pre-state, usable in the instance guard.
    bool pre_valid(const Variant& v, const ExprPtr& e) const {
        for (const auto& n : vars_of(e))
            if (v.written.count(n)) return false;
        return true;
    }
    ExprPtr as_guard(const ExprPtr& e) const { return fold(substitute(e, scoped_)); }

    // Forks the variants until every cell of `names` holds a constant.
    std::vector<Variant> materialize(std::vector<Variant> vs, const std::vector<std::string>& names) {
        for (const auto& name : names) {
            const auto& d = removed_decl(name);
            for (int k = 0; k < d.cells(); ++k) {
                std::vector<Variant> out;
                for (auto& v : vs) {
                    auto& cell = v.cells[name][static_cast<std::size_t>(k)];
                    if (cell.kind == Cell::Const) {
                        out.push_back(std::move(v));
                        continue;
                    }
                    std::size_t made = 0;
                    for (int val = d.lo; val <= d.hi; ++val) {
                        Variant w = v;
                        auto& wc = w.cells[name][static_cast<std::size_t>(k)];
                        if (wc.kind == Cell::Pre) {
                            w.guard = fold(ex::conj(w.guard, ex::eq(as_guard(wc.pre), ex::integer(val))));
                            if (is_false_lit(w.guard)) continue;
                        }
                        wc = {Cell::Const, val, nullptr};
                        out.push_back(std::move(w));
                        ++made;
                    }
                    if (made > 1) forks += made - 1;
                }
                vs = std::move(out);
                if (vs.size() > kMaxVariants) throw AbstractionError("edge instance splits into too many variants");
            }
        }
        return vs;
    }

    std::vector<Binding> const_bindings(const Variant& v, const std::set<std::string>& names) const {
        std::vector<Binding> out;
        for (const auto& n : names) {
            auto it = v.cells.find(n);
            if (it == v.cells.end()) continue;
            const auto& d = removed_decl(n);
            Binding b;
            b.name = n;
            b.index_lo = d.index_lo;
            b.is_array = d.is_array();
            for (const auto& c : it->second) b.values.push_back(c.value);
            out.push_back(std::move(b));
        }
        return out;
    }

    void step(Variant v, const Assign& atom, std::vector<Variant>& out) {
        std::set<std::string> reads = vars_of(atom.rhs);
        for (const auto& k : atom.lhs->kids) reads.merge(vars_of(k));
        std::vector<std::string> removed_reads;
        for (const auto& n : reads)
            if (v.cells.count(n)) removed_reads.push_back(n);
        auto vs = materialize({std::move(v)}, removed_reads);
        for (auto& w : vs) {
            const auto bs = const_bindings(w, reads);
            const ExprPtr rhs = fold(substitute(atom.rhs, bs));
            const std::string& target = atom.lhs->name;
            auto cit = w.cells.find(target);
            if (cit == w.cells.end()) {
                ExprPtr lhs = atom.lhs;
                if (lhs->kind == ExprKind::Index) lhs = ex::index(lhs->name, fold(substitute(lhs->kids[0], bs)));
                w.body.push_back({lhs, rhs});
                w.written.insert(target);
                out.push_back(std::move(w));
                continue;
            }
            // write to a removed variable: track the value instead of emitting the atom
            const auto& d = removed_decl(target);
            std::vector<std::pair<Variant, int>> targets;  // (variant, cell)
            if (atom.lhs->kind == ExprKind::Index) {
                const ExprPtr idx = fold(substitute(atom.lhs->kids[0], bs));
                if (idx->kind == ExprKind::Int) {
                    const auto k = idx->value - d.index_lo;
                    if (k < 0 || k >= d.length) continue;  // out of bounds: the concrete edge is disabled
                    targets.emplace_back(std::move(w), static_cast<int>(k));
                } else {
                    const bool exact = pre_valid(w, idx);
                    for (int k = 0; k < d.length; ++k) {
                        Variant x = w;
                        if (exact) {
                            x.guard = fold(ex::conj(x.guard, ex::eq(as_guard(idx), ex::integer(d.index_lo + k))));
                            if (is_false_lit(x.guard)) continue;
                        }
                        targets.emplace_back(std::move(x), k);
                    }
                    if (targets.size() > 1) forks += targets.size() - 1;
                }
            } else {
                targets.emplace_back(std::move(w), 0);
            }
            for (auto& [x, k] : targets) {
                auto& cell = x.cells[target][static_cast<std::size_t>(k)];
                if (rhs->kind == ExprKind::Int) {
                    if (rhs->value < d.lo || rhs->value > d.hi) continue;  // assignment error in the concrete edge
                    cell = {Cell::Const, static_cast<int>(rhs->value), nullptr};
                } else if (pre_valid(x, rhs)) {
                    const auto g = as_guard(rhs);
                    x.guard = fold(ex::conj(x.guard, ex::conj(ex::bin(BinOp::Le, ex::integer(d.lo), g),
                                                              ex::bin(BinOp::Le, g, ex::integer(d.hi)))));
                    if (is_false_lit(x.guard)) continue;
                    cell = {Cell::Pre, 0, rhs};
                } else {
                    cell = {Cell::Unknown, 0, nullptr};
                }
                out.push_back(std::move(x));
            }
        }
    }

    const std::vector<MapInfo>& maps_;
    std::vector<Binding> scoped_;
};

// Exactness of the instances of one edge: for every state the edge can fire
// from, every instance enabled on the abstracted state is enabled
// concretely and produces the abstraction of the concrete successor.
//
// With `over_enabled` set the check does not stop at the first mismatch; it
// collects the guards of the instances that can fire (guard and update both
// succeed) on the abstraction of a state where the concrete edge cannot.
class ExactnessCheck {
public:
    ExactnessCheck(const MASGraph& mas, const std::vector<MapInfo>& maps) : mas_(mas), maps_(maps) {}

    static constexpr const char* kOverBudget = "exactness check exceeds its budget";

    // Empty string when exact (or, when collecting, when within budget).
    std::string run(const Edge& e, const std::vector<int>& R, const std::vector<int>& E,
                    const std::set<ValueVec>& P, const std::map<ValueVec, std::vector<Variant>>& variants,
                    std::size_t budget, std::vector<ExprPtr>* over_enabled = nullptr) {
        std::set<std::string> cnames = vars_of(e.guard);
        cnames.merge(vars_of(e.update));
        std::set<std::string> removed;
        for (int i : R)
            for (const auto& s : maps_[static_cast<std::size_t>(i)].src) {
                cnames.insert(s.name);
                if (maps_[static_cast<std::size_t>(i)].global) removed.insert(s.name);
            }
        for (int i : E)
            for (const auto& s : maps_[static_cast<std::size_t>(i)].src) cnames.insert(s.name);
        std::vector<VarDecl> cdecl, adecl;
        for (const auto& n : cnames) {
            cdecl.push_back(*mas_.find_var(n));
            if (!removed.count(n)) adecl.push_back(cdecl.back());
        }
        std::vector<int> zmaps;
        for (int i : R) zmaps.push_back(i);
        for (int i : E) zmaps.push_back(i);
        for (int i : zmaps)
            if (maps_[static_cast<std::size_t>(i)].targeted()) adecl.push_back(*maps_[static_cast<std::size_t>(i)].m.target);
        const Layout lc(cdecl), la(adecl);

        // concrete slots of every mapping's source cells
        std::vector<std::vector<int>> src_slots(maps_.size());
        for (int i : zmaps)
            for (const auto& s : maps_[static_cast<std::size_t>(i)].src)
                for (int k = 0; k < s.cells(); ++k) src_slots[static_cast<std::size_t>(i)].push_back(lc.offset(s.name) + k);
        std::vector<int> r_slots;
        for (int i : R)
            r_slots.insert(r_slots.end(), src_slots[static_cast<std::size_t>(i)].begin(), src_slots[static_cast<std::size_t>(i)].end());
        std::vector<int> free_slots;
        std::vector<std::pair<int, int>> free_ranges;
        for (int s = 0; s < lc.slot_count(); ++s)
            if (std::find(r_slots.begin(), r_slots.end(), s) == r_slots.end()) {
                free_slots.push_back(s);
                free_ranges.emplace_back(lc.slot_lo(s), lc.slot_hi(s));
            }
        double work = static_cast<double>(P.size());
        for (auto [lo, hi] : free_ranges) work *= hi - lo + 1;
        std::size_t nvariants = 0;
        for (const auto& [c, vs] : variants) nvariants += vs.size();
        work *= static_cast<double>(std::max<std::size_t>(1, nvariants));
        if (work > static_cast<double>(budget)) return kOverBudget;

        const Code cg(e.guard, lc);
        const CompiledUpdate cu(e.update, lc);
        struct Compiled {
            Code guard;
            CompiledUpdate update;
            ExprPtr source;
            bool flagged = false;
        };
        std::map<ValueVec, std::vector<Compiled>> comp;
        for (const auto& [c, vs] : variants)
            for (const auto& v : vs) comp[c].push_back({Code(v.guard, la), CompiledUpdate(v.body, la), v.guard});

        auto alpha = [&](const Valuation& s, int loc) {
            Valuation a(static_cast<std::size_t>(la.slot_count()));
            for (const auto& d : la.vars()) {
                const int ao = la.offset(d.name);
                int owner = -1;
                bool is_target = false;
                for (int i : zmaps) {
                    const auto& mi = maps_[static_cast<std::size_t>(i)];
                    if (mi.targeted() && mi.m.target->name == d.name) owner = i, is_target = true;
                    for (const auto& sd : mi.src)
                        if (sd.name == d.name) owner = i;
                }
                if (owner < 0) {
                    const int co = lc.offset(d.name);
                    for (int k = 0; k < d.cells(); ++k) a[static_cast<std::size_t>(ao + k)] = s[static_cast<std::size_t>(co + k)];
                    continue;
                }
                const auto& mi = maps_[static_cast<std::size_t>(owner)];
                const bool inside = mi.in_scope[static_cast<std::size_t>(loc)];
                if (is_target) {
                    if (inside) {
                        std::vector<int> cells;
                        for (int sl : src_slots[static_cast<std::size_t>(owner)]) cells.push_back(s[static_cast<std::size_t>(sl)]);
                        a[static_cast<std::size_t>(ao)] = apply_fn(mi.m.fn, cells);
                    } else {
                        a[static_cast<std::size_t>(ao)] = *mi.m.outside_default;
                    }
                } else {
                    // scoped source: reset inside the scope, concrete outside
                    std::size_t first = 0;
                    for (const auto& sd : mi.src) {
                        if (sd.name == d.name) break;
                        first += static_cast<std::size_t>(sd.cells());
                    }
                    const int co = lc.offset(d.name);
                    for (int k = 0; k < d.cells(); ++k)
                        a[static_cast<std::size_t>(ao + k)] =
                            inside ? (*mi.m.reset)[first + static_cast<std::size_t>(k)] : s[static_cast<std::size_t>(co + k)];
                }
            }
            return a;
        };

        const bool recv = e.sync.kind == SyncKind::Recv;
        std::string failure;
        Valuation sigma = lc.initial();
        for (const auto& pv : P) {
            for (std::size_t k = 0; k < r_slots.size(); ++k) sigma[static_cast<std::size_t>(r_slots[k])] = pv[k];
            for_each_valuation(free_ranges, [&](const std::vector<int>& fv) {
                if (!failure.empty()) return;
                for (std::size_t k = 0; k < free_slots.size(); ++k) sigma[static_cast<std::size_t>(free_slots[k])] = fv[k];
                const bool gc = cg.holds(sigma);
                Valuation post = sigma;
                const bool okc = cu.apply(post);
                const Valuation a = alpha(sigma, e.src);
                const Valuation apost = okc ? alpha(post, e.dst) : Valuation{};
                for (auto& [c, vs] : comp) {
                    if (!consistent(R, c, sigma, src_slots)) continue;
                    for (auto& v : vs) {
                        const bool ga = v.guard.holds(a);
                        if (over_enabled) {
                            if (v.flagged || !ga || (gc && okc)) continue;
                            Valuation b = a;
                            if (v.update.apply(b)) {
                                v.flagged = true;
                                over_enabled->push_back(v.source);
                            }
                            continue;
                        }
                        if (ga && !gc) {
                            failure = "instance " + vec_text(c) + " is enabled where the edge is not";
                            return;
                        }
                        if (!ga && !recv) continue;
                        Valuation b = a;
                        if (!v.update.apply(b)) continue;
                        if (!okc || b != apost) {
                            failure = "instance " + vec_text(c) + " reaches a state the edge does not";
                            return;
                        }
                    }
                }
            });
            if (!failure.empty()) break;
        }
        return failure;
    }

private:
    bool consistent(const std::vector<int>& R, const ValueVec& c, const Valuation& sigma,
                    const std::vector<std::vector<int>>& src_slots) const {
        std::size_t off = 0;
        for (int i : R) {
            const auto& mi = maps_[static_cast<std::size_t>(i)];
            const auto n = static_cast<std::size_t>(mi.ncells());
            if (mi.targeted()) {
                std::vector<int> ci(c.begin() + static_cast<long>(off), c.begin() + static_cast<long>(off + n));
                std::vector<int> si;
                for (int sl : src_slots[static_cast<std::size_t>(i)]) si.push_back(sigma[static_cast<std::size_t>(sl)]);
                if (apply_fn(mi.m.fn, ci) != apply_fn(mi.m.fn, si)) return false;
            }
            off += n;
        }
        return true;
    }

    const MASGraph& mas_;
    const std::vector<MapInfo>& maps_;
};

std::string edge_label(const AgentGraph& a, const Edge& e, std::size_t k) {
    return a.name + " edge #" + std::to_string(k) + " " + a.locations[static_cast<std::size_t>(e.src)] + " -> " +
           a.locations[static_cast<std::size_t>(e.dst)];
}

}  // namespace

AgentGraph transform_agent(const MASGraph& mas, int agent, const std::vector<Mapping>& maps_in,
                           const NarrowedDomain& d, const AbstractionOptions& opts, AbstractionReport* report) {
    const auto t0 = Clock::now();
    AbstractionReport local;
    AbstractionReport& rep = report ? *report : local;
    const AgentGraph& a = mas.agents.at(static_cast<std::size_t>(agent));
    const Layout dl(d.vars);

    std::vector<MapInfo> maps;
    std::set<std::string> seen_sources, seen_targets;
    for (const auto& m0 : maps_in) {
        MapInfo mi;
        mi.m = resolve_mapping(mas, m0);
        if (mi.m.agent != a.name) throw AbstractionError("mapping for " + mi.m.agent + " passed to " + a.name);
        for (const auto& s : mi.m.sources) {
            if (!seen_sources.insert(s).second) throw AbstractionError("source '" + s + "' is used by two mappings");
            mi.src.push_back(*mas.find_var(s));
            const auto* dv = dl.find(s);
            if (!dv) throw AbstractionError("domain does not cover '" + s + "'");
            for (int k = 0; k < dv->cells(); ++k) mi.dpos.push_back(dl.offset(s) + k);
        }
        if (mi.targeted() && !seen_targets.insert(mi.m.target->name).second)
            throw AbstractionError("target '" + mi.m.target->name + "' is used by two mappings");
        for (const auto& s : mi.src) mi.init.insert(mi.init.end(), s.init.begin(), s.init.end());
        mi.global = !mi.m.scope.has_value();
        mi.in_scope.assign(a.locations.size(), mi.global ? 1 : 0);
        if (mi.m.scope)
            for (const auto& l : *mi.m.scope) mi.in_scope[static_cast<std::size_t>(a.location_index(l))] = 1;
        maps.push_back(std::move(mi));
    }
    if (d.table.size() != a.locations.size()) throw AbstractionError("domain does not cover every location of " + a.name);

    AgentGraph out;
    out.name = a.name;
    out.locations = a.locations;
    out.initial = a.initial;
    for (const auto& v : a.vars) {
        bool removed = false;
        VarDecl nv = v;
        for (const auto& mi : maps) {
            std::size_t first = 0;
            for (const auto& s : mi.src) {
                if (s.name == v.name) {
                    if (mi.global) removed = true;
                    else if (mi.in_scope[static_cast<std::size_t>(a.initial)])
                        for (int k = 0; k < v.cells(); ++k) nv.init[static_cast<std::size_t>(k)] = (*mi.m.reset)[first + static_cast<std::size_t>(k)];
                }
                first += static_cast<std::size_t>(s.cells());
            }
        }
        if (!removed) out.vars.push_back(nv);
    }
    for (const auto& mi : maps) {
        if (!mi.targeted()) continue;
        VarDecl z = *mi.m.target;
        z.init = {mi.in_scope[static_cast<std::size_t>(a.initial)] ? apply_fn(mi.m.fn, mi.init) : *mi.m.outside_default};
        out.vars.push_back(z);
    }

    // identical instances (also across concrete edges) are emitted once
    std::set<std::string> emitted;
    auto emit = [&](Edge ne) {
        const auto key = std::to_string(ne.src) + ">" + std::to_string(ne.dst) + " " + to_string(ne.sync) + " " +
                         to_string(ne.guard) + " | " + to_string(ne.update);
        if (!emitted.insert(key).second) return;
        out.edges.push_back(std::move(ne));
        ++rep.edges_out;
    };
    Instantiator inst(maps);
    ExactnessCheck exact(mas, maps);
    std::vector<ExprPtr> stutter(a.locations.size());
    for (std::size_t k = 0; k < a.edges.size(); ++k) {
        const Edge& e = a.edges[k];
        ++rep.edges_in;
        std::set<std::string> touched = vars_of(e.guard);
        touched.merge(vars_of(e.update));
        std::vector<int> R, E;
        for (std::size_t i = 0; i < maps.size(); ++i) {
            const auto& mi = maps[i];
            const bool in_l = mi.in_scope[static_cast<std::size_t>(e.src)];
            const bool in_dst = mi.in_scope[static_cast<std::size_t>(e.dst)];
            std::set<std::string> names;
            for (const auto& s : mi.src) names.insert(s.name);
            const bool touches = !disjoint(names, touched);
            if (in_l && (touches || !in_dst)) R.push_back(static_cast<int>(i));
            else if (!in_l && in_dst) E.push_back(static_cast<int>(i));
        }
        if (R.empty() && E.empty()) {
            Edge copy = e;
            copy.origin = static_cast<int>(k);
            emit(std::move(copy));
            continue;
        }
        std::set<ValueVec> P;
        for (const auto& vec : d.table[static_cast<std::size_t>(e.src)]) {
            ValueVec p;
            for (int i : R)
                for (int pos : maps[static_cast<std::size_t>(i)].dpos) p.push_back(vec[static_cast<std::size_t>(pos)]);
            P.insert(std::move(p));
        }
        std::map<ValueVec, std::vector<Variant>> variants;
        for (const auto& c : P) {
            ++rep.instances;
            auto vs = inst.run(e, R, E, c);
            if (vs.empty()) ++rep.pruned;
            for (const auto& v : vs) {
                Edge ne;
                ne.src = e.src;
                ne.dst = e.dst;
                ne.sync = e.sync;
                ne.guard = v.guard;
                ne.update = v.body;
                ne.origin = static_cast<int>(k);
                emit(std::move(ne));
            }
            variants[c] = std::move(vs);
        }
        if (opts.mode == AbsMode::May && !R.empty()) {
            std::vector<ExprPtr> loose;
            auto& st = stutter[static_cast<std::size_t>(e.src)];
            if (!exact.run(e, R, E, P, variants, opts.check_budget, &loose).empty()) loose = {ex::truth()};
            for (const auto& g : loose) st = st ? fold(ex::disj(st, g)) : g;
        }
        if (opts.mode == AbsMode::Must && !R.empty()) {
            std::string why;
            if (!d.complete) why = "lower domain incomplete";
            else why = exact.run(e, R, E, P, variants, opts.check_budget);
            if (!why.empty()) {
                ++rep.unsupported_edges;
                rep.supported = false;
                rep.diagnostics.push_back("unsupported " + edge_label(a, e, k) + ": " + why);
            }
        }
    }
    // A concrete deadlock gets a closure self-loop; where an instance can fire
    // on its abstraction, the abstract state is not dead and needs its own.
    for (std::size_t l = 0; l < stutter.size(); ++l) {
        if (!stutter[l]) continue;
        Edge loop;
        loop.src = loop.dst = static_cast<int>(l);
        loop.guard = stutter[l];
        loop.origin = -1;
        emit(std::move(loop));
        ++rep.stutters;
    }
    rep.forks += inst.forks;
    rep.transform_ms += ms_since(t0);
    return out;
}

AgentGraph remove_variables(const MASGraph& mas, int agent, const std::vector<std::string>& vars,
                            const NarrowedDomain& d, const AbstractionOptions& opts, AbstractionReport* report) {
    std::vector<Mapping> maps;
    for (const auto& v : vars) {
        Mapping m;
        m.agent = mas.agents.at(static_cast<std::size_t>(agent)).name;
        m.sources = {v};
        maps.push_back(std::move(m));
    }
    return transform_agent(mas, agent, maps, d, opts, report);
}

AgentGraph merge_variables(const MASGraph& mas, int agent, const NarrowedDomain& d, const std::vector<Mapping>& maps,
                           const AbstractionOptions& opts, AbstractionReport* report) {
    for (const auto& m : maps)
        if (m.scope) throw AbstractionError("merge_variables takes mappings without scopes");
    return transform_agent(mas, agent, maps, d, opts, report);
}

AgentGraph scoped_abstraction(const MASGraph& mas, int agent, const NarrowedDomain& d,
                              const std::vector<Mapping>& maps, const AbstractionOptions& opts,
                              AbstractionReport* report) {
    std::vector<Mapping> scoped = maps;
    const auto& a = mas.agents.at(static_cast<std::size_t>(agent));
    for (auto& m : scoped)
        if (!m.scope) m.scope = a.locations;
    return transform_agent(mas, agent, scoped, d, opts, report);
}

MASGraph abstract_mas(const MASGraph& mas, const std::vector<Mapping>& maps_in, const AbstractionOptions& opts,
                      AbstractionReport* report) {
    AbstractionReport local;
    AbstractionReport& rep = report ? *report : local;
    if (maps_in.empty()) return mas;
    std::vector<Mapping> maps;
    std::vector<std::string> sources;
    for (const auto& m : maps_in) {
        maps.push_back(resolve_mapping(mas, m));
        sources.insert(sources.end(), maps.back().sources.begin(), maps.back().sources.end());
    }

    auto t0 = Clock::now();
    const auto g = combine_reachable(mas);
    const auto mode = opts.mode == AbsMode::May ? DomainMode::Upper : DomainMode::Lower;
    const auto dom = approx_local_domain(g, sources, mode, opts.domain);
    rep.domain_complete = dom.complete;
    if (!dom.complete) rep.diagnostics.push_back("lower domain exploration stopped at its budget");
    rep.domain_ms += ms_since(t0);

    MASGraph out = mas;
    for (std::size_t ai = 0; ai < mas.agents.size(); ++ai) {
        std::vector<Mapping> mine;
        for (const auto& m : maps)
            if (m.agent == mas.agents[ai].name) mine.push_back(m);
        if (mine.empty()) continue;
        out.agents[ai] = transform_agent(mas, static_cast<int>(ai), mine, narrow(dom, g, static_cast<int>(ai)), opts, &rep);
        for (const auto& m : mine)
            if (m.fn && m.target) out.tables.push_back(m.fn);
    }
    out.g0 = out.initial_condition();
    validate(out);
    return out;
}

}  // namespace masabs

#include "masabs/model.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace masabs {

const std::vector<std::uint8_t>& Model::prop(const std::string& name) const {
    auto it = labels.find(name);
    if (it == labels.end()) throw DefectError("proposition '" + name + "' is not in the model's labelling");
    return it->second;
}

std::string Model::describe(int s) const {
    std::ostringstream os;
    os << '#' << s;
    if (!has_payload()) return os.str();
    os << ' ' << loc_names[static_cast<std::size_t>(loc[static_cast<std::size_t>(s)])] << " {";
    const auto v = valuation(s);
    for (int i = 0; i < layout.slot_count(); ++i)
        os << (i ? ", " : "") << layout.slot_name(i) << '=' << v[static_cast<std::size_t>(i)];
    os << '}';
    return os.str();
}

Model Model::build(int n, const std::vector<std::pair<int, int>>& edges, std::vector<int> initial,
                   std::map<std::string, std::vector<std::uint8_t>> labels) {
    Model m;
    m.n = n;
    m.initial = std::move(initial);
    m.labels = std::move(labels);
    std::vector<std::vector<std::uint32_t>> adj(static_cast<std::size_t>(n));
    for (const auto& [s, t] : edges) adj[static_cast<std::size_t>(s)].push_back(static_cast<std::uint32_t>(t));
    m.succ_begin.push_back(0);
    m.closure.assign(static_cast<std::size_t>(n), 0);
    for (int s = 0; s < n; ++s) {
        auto& a = adj[static_cast<std::size_t>(s)];
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        if (a.empty()) {
            a.push_back(static_cast<std::uint32_t>(s));
            m.closure[static_cast<std::size_t>(s)] = 1;
        }
        m.succ.insert(m.succ.end(), a.begin(), a.end());
        m.succ_begin.push_back(static_cast<std::uint32_t>(m.succ.size()));
    }
    return m;
}

namespace {

// Open-addressing set of state ids keyed by the (location, valuation) each id stores.
class StateTable {
public:
    StateTable(const std::vector<int>& loc, const std::vector<int>& vals, std::size_t width)
        : loc_(loc), vals_(vals), width_(width) {
        slots_.assign(1u << 12, kEmpty);
    }

    static std::uint64_t hash(int l, const int* v, std::size_t w) {
        std::uint64_t h = 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(l));
        for (std::size_t i = 0; i < w; ++i) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v[i]));
            h *= 0xFF51AFD7ED558CCDull;
            h ^= h >> 32;
        }
        return h;
    }

    /// Returns the id stored for (l, v), or kEmpty.
    std::uint32_t find(int l, const int* v) const {
        const std::size_t mask = slots_.size() - 1;
        for (std::size_t i = hash(l, v, width_) & mask;; i = (i + 1) & mask) {
            const auto id = slots_[i];
            if (id == kEmpty) return kEmpty;
            if (same(id, l, v)) return id;
        }
    }

    /// Records id for the contents already appended to the stores.
    void insert(std::uint32_t id) {
        if ((count_ + 1) * 2 > slots_.size()) grow();
        place(id);
        ++count_;
    }

    std::size_t bytes() const { return slots_.size() * sizeof(std::uint32_t); }

    static constexpr std::uint32_t kEmpty = 0xFFFFFFFFu;

private:
    bool same(std::uint32_t id, int l, const int* v) const {
        if (loc_[id] != l) return false;
        const int* w = vals_.data() + static_cast<std::size_t>(id) * width_;
        return std::equal(w, w + width_, v);
    }
    void place(std::uint32_t id) {
        const std::size_t mask = slots_.size() - 1;
        const int* v = vals_.data() + static_cast<std::size_t>(id) * width_;
        std::size_t i = hash(loc_[id], v, width_) & mask;
        while (slots_[i] != kEmpty) i = (i + 1) & mask;
        slots_[i] = id;
    }
    void grow() {
        std::vector<std::uint32_t> old;
        old.swap(slots_);
        slots_.assign(old.size() * 2, kEmpty);
        for (auto id : old)
            if (id != kEmpty) place(id);
    }

    const std::vector<int>& loc_;
    const std::vector<int>& vals_;
    std::size_t width_;
    std::vector<std::uint32_t> slots_;
    std::size_t count_ = 0;
};

}  // namespace

Model unwrap(const CombinedGraph& g, const std::vector<ExprPtr>& requested_guards, const UnwrapOptions& opts,
             UnwrapStats* stats_out) {
    const auto t0 = std::chrono::steady_clock::now();
    Model m;
    m.layout = Layout(g.vars);
    m.loc_tuples = g.locations;
    for (int l = 0; l < g.location_count(); ++l) m.loc_names.push_back(g.location_name(l));
    const auto width = static_cast<std::size_t>(m.layout.slot_count());

    struct CEdge {
        int dst;
        Code guard;
        CompiledUpdate update;
    };
    std::vector<std::vector<CEdge>> out(g.locations.size());
    for (const auto& e : g.edges)
        out[static_cast<std::size_t>(e.src)].push_back({e.dst, Code(e.guard, m.layout), CompiledUpdate(e.update, m.layout)});

    StateTable table(m.loc, m.vals, width);
    UnwrapStats st;
    auto fill_stats = [&] {
        st.states = m.loc.size();
        st.transitions = m.succ.size();
        st.bytes = m.vals.capacity() * sizeof(int) + m.loc.capacity() * sizeof(int) + table.bytes() +
                   m.succ.capacity() * sizeof(std::uint32_t) + m.succ_begin.capacity() * sizeof(std::uint32_t);
        st.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    };
    auto add_state = [&](int l, const int* v) -> std::uint32_t {
        const auto found = table.find(l, v);
        if (found != StateTable::kEmpty) return found;
        if (m.loc.size() >= opts.max_states) {
            fill_stats();
            st.complete = false;
            if (stats_out) *stats_out = st;
            throw ResourceError("state budget of " + std::to_string(opts.max_states) + " exceeded", st);
        }
        const auto id = static_cast<std::uint32_t>(m.loc.size());
        m.loc.push_back(l);
        m.vals.insert(m.vals.end(), v, v + width);
        table.insert(id);
        return id;
    };

    const Valuation init = m.layout.initial();
    const Code g0(g.g0 ? g.g0 : ex::truth(), m.layout);
    if (g0.holds(init)) m.initial.push_back(static_cast<int>(add_state(g.initial, init.data())));

    // successor buffer: (dst location, valuation) pairs
    std::vector<int> buf;
    std::vector<std::size_t> order;
    std::vector<int> cur(width), next(width);
    m.succ_begin.push_back(0);
    for (std::size_t s = 0; s < m.loc.size(); ++s) {
        const int l = m.loc[s];
        std::copy_n(m.vals.begin() + static_cast<std::ptrdiff_t>(s * width), width, cur.begin());
        buf.clear();
        std::size_t k = 0;
        for (const auto& e : out[static_cast<std::size_t>(l)]) {
            if (!e.guard.holds(cur)) continue;
            next = cur;
            if (!e.update.apply(next)) continue;
            buf.push_back(e.dst);
            buf.insert(buf.end(), next.begin(), next.end());
            ++k;
        }
        const std::size_t rec = width + 1;
        order.resize(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::lexicographical_compare(buf.begin() + static_cast<std::ptrdiff_t>(a * rec),
                                                buf.begin() + static_cast<std::ptrdiff_t>((a + 1) * rec),
                                                buf.begin() + static_cast<std::ptrdiff_t>(b * rec),
                                                buf.begin() + static_cast<std::ptrdiff_t>((b + 1) * rec));
        });
        const auto first = m.succ.size();
        for (std::size_t i = 0; i < k; ++i) {
            const int* r = buf.data() + order[i] * rec;
            if (i > 0) {
                const int* p = buf.data() + order[i - 1] * rec;
                if (std::equal(r, r + rec, p)) continue;
            }
            m.succ.push_back(add_state(r[0], r + 1));
        }
        if (m.succ.size() == first) {
            m.succ.push_back(static_cast<std::uint32_t>(s));
            m.closure.push_back(1);
            ++st.closure_loops;
        } else {
            m.closure.push_back(0);
        }
        m.succ_begin.push_back(static_cast<std::uint32_t>(m.succ.size()));
    }
    m.n = static_cast<int>(m.loc.size());

    // every agent location gets a label, including ones the graph no longer contains
    for (std::size_t a = 0; a < g.agent_names.size(); ++a)
        for (const auto& l : g.agent_locations[a])
            m.labels.emplace(g.agent_names[a] + "." + l, std::vector<std::uint8_t>(m.loc.size(), 0));
    for (int s = 0; s < m.n; ++s)
        for (const auto& p : g.location_props(m.loc[static_cast<std::size_t>(s)])) m.labels[p][static_cast<std::size_t>(s)] = 1;
    for (const auto& gp : requested_guards) {
        const auto name = to_string(gp);
        if (m.labels.count(name)) continue;
        const Code c(gp, m.layout);
        std::vector<std::uint8_t> bits(m.loc.size(), 0);
        for (int s = 0; s < m.n; ++s) bits[static_cast<std::size_t>(s)] = c.holds(m.valuation(s));
        m.labels.emplace(name, std::move(bits));
        m.guard_props.emplace_back(name, gp);
    }
    fill_stats();
    if (stats_out) *stats_out = st;
    return m;
}

std::vector<std::uint8_t> reachable(const Model& m) {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(m.n), 0);
    std::deque<int> q;
    for (int s : m.initial)
        if (!seen[static_cast<std::size_t>(s)]) {
            seen[static_cast<std::size_t>(s)] = 1;
            q.push_back(s);
        }
    while (!q.empty()) {
        const int s = q.front();
        q.pop_front();
        for (auto t : m.successors(s))
            if (!seen[t]) {
                seen[t] = 1;
                q.push_back(static_cast<int>(t));
            }
    }
    return seen;
}

std::vector<std::string> project_ap(const Model& m, const std::set<std::string>& keep) {
    std::vector<std::string> out;
    std::set<std::string> guards;
    for (const auto& [name, g] : m.guard_props) {
        guards.insert(name);
        const auto vs = vars_of(g);
        if (std::all_of(vs.begin(), vs.end(), [&](const std::string& v) { return keep.count(v) > 0; }))
            out.push_back(name);
    }
    for (const auto& [name, bits] : m.labels)
        if (!guards.count(name)) out.push_back(name);
    std::sort(out.begin(), out.end());
    return out;
}

std::string model_to_json(const Model& m) {
    nlohmann::json j;
    j["format"] = "masabs-model";
    j["version"] = 1;
    j["initial"] = m.initial;
    auto& states = j["states"] = nlohmann::json::array();
    for (int s = 0; s < m.n; ++s) {
        nlohmann::json st;
        st["id"] = s;
        if (m.has_payload()) {
            st["location"] = m.loc_names[static_cast<std::size_t>(m.loc[static_cast<std::size_t>(s)])];
            nlohmann::json v = nlohmann::json::object();
            const auto val = m.valuation(s);
            for (int i = 0; i < m.layout.slot_count(); ++i) v[m.layout.slot_name(i)] = val[static_cast<std::size_t>(i)];
            st["valuation"] = v;
        }
        st["successors"] = std::vector<std::uint32_t>(m.successors(s).begin(), m.successors(s).end());
        if (m.closure[static_cast<std::size_t>(s)]) st["closure_loop"] = true;
        states.push_back(std::move(st));
    }
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [name, bits] : m.labels) {
        std::vector<int> ids;
        for (int s = 0; s < m.n; ++s)
            if (bits[static_cast<std::size_t>(s)]) ids.push_back(s);
        labels[name] = ids;
    }
    j["labels"] = labels;
    return j.dump(1);
}

}  // namespace masabs

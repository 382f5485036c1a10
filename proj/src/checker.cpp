#include "masabs/checker.hpp"

#include <deque>
#include <unordered_map>

#include <json.hpp>

namespace masabs {

namespace {

using Bits = std::vector<std::uint8_t>;

struct Preds {
    std::vector<std::uint32_t> begin, list;
    explicit Preds(const Model& m) : begin(static_cast<std::size_t>(m.n) + 1, 0), list(m.succ.size()) {
        for (auto t : m.succ) ++begin[t + 1];
        for (std::size_t i = 1; i < begin.size(); ++i) begin[i] += begin[i - 1];
        std::vector<std::uint32_t> fill(begin.begin(), begin.end() - 1);
        for (int s = 0; s < m.n; ++s)
            for (auto t : m.successors(s)) list[fill[t]++] = static_cast<std::uint32_t>(s);
    }
    std::span<const std::uint32_t> of(std::uint32_t t) const {
        return {list.data() + begin[t], list.data() + begin[t + 1]};
    }
};

class Checker {
public:
    Checker(const Model& m, const CheckOptions& opts) : m_(m), opts_(opts), preds_(m) {}

    Bits eval(const FormulaPtr& f) {
        const auto n = static_cast<std::size_t>(m_.n);
        switch (f->kind) {
            case FKind::True: return Bits(n, 1);
            case FKind::False: return Bits(n, 0);
            case FKind::Atom: return m_.prop(f->prop);
            case FKind::NotAtom: {
                Bits b = m_.prop(f->prop);
                for (auto& x : b) x = !x;
                return b;
            }
            case FKind::And:
            case FKind::Or: {
                Bits a = eval(f->kids[0]);
                const Bits b = eval(f->kids[1]);
                for (std::size_t i = 0; i < n; ++i) a[i] = f->kind == FKind::And ? (a[i] && b[i]) : (a[i] || b[i]);
                return a;
            }
            case FKind::AX: return all_next(eval(f->kids[0]));
            case FKind::AU: {
                const Bits a = eval(f->kids[0]), b = eval(f->kids[1]);
                Bits u = until(a, b);
                if (!opts_.strict_until) return u;
                Bits nx = all_next(u);
                for (std::size_t i = 0; i < n; ++i) nx[i] = b[i] || nx[i];
                return nx;
            }
            case FKind::AG: return globally(eval(f->kids[0]));
        }
        return {};
    }

    Bits all_next(const Bits& sub) const {
        Bits out(static_cast<std::size_t>(m_.n), 1);
        for (int s = 0; s < m_.n; ++s)
            for (auto t : m_.successors(s))
                if (!sub[t]) {
                    out[static_cast<std::size_t>(s)] = 0;
                    break;
                }
        return out;
    }

    // least fixpoint of b | (a & AX Z), by successor counting
    Bits until(const Bits& a, const Bits& b) const {
        const auto n = static_cast<std::size_t>(m_.n);
        Bits sat = b;
        std::vector<std::uint32_t> left(n);
        std::deque<std::uint32_t> q;
        for (std::size_t s = 0; s < n; ++s) {
            left[s] = m_.succ_begin[s + 1] - m_.succ_begin[s];
            if (sat[s]) q.push_back(static_cast<std::uint32_t>(s));
        }
        while (!q.empty()) {
            const auto t = q.front();
            q.pop_front();
            for (auto p : preds_.of(t)) {
                if (sat[p]) continue;
                if (--left[p] == 0 && a[p]) {
                    sat[p] = 1;
                    q.push_back(p);
                }
            }
        }
        return sat;
    }

    // greatest fixpoint of a & AX Z: drop every state with a dropped successor
    Bits globally(const Bits& a) const {
        Bits sat = a;
        std::deque<std::uint32_t> q;
        for (int s = 0; s < m_.n; ++s)
            if (!sat[static_cast<std::size_t>(s)]) q.push_back(static_cast<std::uint32_t>(s));
        while (!q.empty()) {
            const auto t = q.front();
            q.pop_front();
            for (auto p : preds_.of(t))
                if (sat[p]) {
                    sat[p] = 0;
                    q.push_back(p);
                }
        }
        return sat;
    }

    // Counterexample for f violated at s, when f's top is temporal.
    bool witness(const FormulaPtr& f, int s, Lasso& out) {
        switch (f->kind) {
            case FKind::And: {
                for (const auto& k : f->kids)
                    if (!eval(k)[static_cast<std::size_t>(s)]) return witness(k, s, out);
                return false;
            }
            case FKind::AX: {
                const Bits sub = eval(f->kids[0]);
                for (auto t : m_.successors(s))
                    if (!sub[t]) return close({s, static_cast<int>(t)}, out);
                return false;
            }
            case FKind::AG: {
                const Bits sub = eval(f->kids[0]);
                std::unordered_map<int, int> parent{{s, -1}};
                std::deque<int> q{s};
                while (!q.empty()) {
                    const int x = q.front();
                    q.pop_front();
                    if (!sub[static_cast<std::size_t>(x)]) {
                        std::vector<int> path;
                        for (int y = x; y >= 0; y = parent[y]) path.insert(path.begin(), y);
                        return close(std::move(path), out);
                    }
                    for (auto t : m_.successors(x))
                        if (parent.emplace(static_cast<int>(t), x).second) q.push_back(static_cast<int>(t));
                }
                return false;
            }
            case FKind::AU: {
                const Bits a = eval(f->kids[0]), b = eval(f->kids[1]);
                const Bits u = until(a, b);
                std::vector<int> path;
                std::unordered_map<int, int> pos;
                int cur = s;
                bool first = true;
                while (true) {
                    if (auto it = pos.find(cur); it != pos.end()) {
                        out.prefix.assign(path.begin(), path.begin() + it->second);
                        out.cycle.assign(path.begin() + it->second, path.end());
                        return true;
                    }
                    pos[cur] = static_cast<int>(path.size());
                    path.push_back(cur);
                    const auto c = static_cast<std::size_t>(cur);
                    if (!(first && opts_.strict_until) && !a[c] && !b[c]) return close(std::move(path), out);
                    first = false;
                    int next = -1;
                    for (auto t : m_.successors(cur))
                        if (!u[t]) {
                            next = static_cast<int>(t);
                            break;
                        }
                    if (next < 0) return false;
                    cur = next;
                }
            }
            default: return false;
        }
    }

private:
    // Extends a path by first successors until a state repeats.
    bool close(std::vector<int> path, Lasso& out) const {
        std::unordered_map<int, int> pos;
        for (std::size_t i = 0; i < path.size(); ++i) pos.emplace(path[i], static_cast<int>(i));
        // only the last occurrence matters for extension; an earlier repeat already closes
        int cur = path.back();
        pos[cur] = static_cast<int>(path.size()) - 1;
        while (true) {
            const int t = static_cast<int>(m_.successors(cur)[0]);
            if (auto it = pos.find(t); it != pos.end()) {
                out.prefix.assign(path.begin(), path.begin() + it->second);
                out.cycle.assign(path.begin() + it->second, path.end());
                return true;
            }
            pos[t] = static_cast<int>(path.size());
            path.push_back(t);
            cur = t;
        }
    }

    const Model& m_;
    CheckOptions opts_;
    Preds preds_;
};

}  // namespace

std::vector<std::uint8_t> satisfying_states(const Model& m, const FormulaPtr& f, const CheckOptions& opts) {
    return Checker(m, opts).eval(f);
}

Verdict check(const Model& m, const FormulaPtr& f, const CheckOptions& opts) {
    Checker c(m, opts);
    const auto sat = c.eval(f);
    Verdict v;
    for (int s : m.initial)
        if (!sat[static_cast<std::size_t>(s)]) {
            v.holds = false;
            v.failing_initial = s;
            v.has_witness = c.witness(f, s, v.witness);
            break;
        }
    return v;
}

bool check_at(const Model& m, int state, const FormulaPtr& f, const CheckOptions& opts) {
    return satisfying_states(m, f, opts)[static_cast<std::size_t>(state)] != 0;
}

bool lasso_is_path(const Model& m, const Lasso& l) {
    if (l.cycle.empty()) return false;
    std::vector<int> seq = l.prefix;
    seq.insert(seq.end(), l.cycle.begin(), l.cycle.end());
    seq.push_back(l.cycle.front());
    auto edge = [&](int a, int b) {
        for (auto t : m.successors(a))
            if (static_cast<int>(t) == b) return true;
        return false;
    };
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        if (!edge(seq[i], seq[i + 1])) return false;
    return true;
}

std::string verdict_to_json(const Verdict& v, const Model& m) {
    nlohmann::json j;
    j["holds"] = v.holds;
    if (!v.holds) j["failing_initial"] = v.failing_initial;
    if (v.has_witness) {
        j["witness"]["prefix"] = v.witness.prefix;
        j["witness"]["cycle"] = v.witness.cycle;
        if (m.has_payload()) {
            nlohmann::json states = nlohmann::json::array();
            for (int s : v.witness.prefix) states.push_back(m.describe(s));
            for (int s : v.witness.cycle) states.push_back(m.describe(s));
            j["witness"]["states"] = states;
        }
    }
    return j.dump(1);
}

}  // namespace masabs

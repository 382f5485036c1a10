#pragma once

// Brute-force evaluation of universal formulas: a path quantifier holds at
// s when every simple lasso from s (a simple path closed by an edge back
// onto itself) satisfies the path formula. Every violating infinite path has
// a violating simple lasso for the X, U and G operators, so this decides the
// same relation as the fixpoint checker without sharing any of its code.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "masabs/formula.hpp"
#include "masabs/model.hpp"

namespace oracle {

class TooManyLassos : public std::runtime_error {
public:
    TooManyLassos() : std::runtime_error("lasso enumeration budget exhausted") {}
};

class LassoOracle {
public:
    LassoOracle(const masabs::Model& m, bool strict_until, std::size_t budget)
        : m_(m), strict_(strict_until), budget_(budget) {}

    std::vector<std::uint8_t> sat(const masabs::FormulaPtr& f) {
        using masabs::FKind;
        const auto n = static_cast<std::size_t>(m_.n);
        std::vector<std::uint8_t> out(n, 0);
        switch (f->kind) {
            case FKind::True: out.assign(n, 1); return out;
            case FKind::False: return out;
            case FKind::Atom: return m_.prop(f->prop);
            case FKind::NotAtom:
                out = m_.prop(f->prop);
                for (auto& x : out) x = !x;
                return out;
            case FKind::And:
            case FKind::Or: {
                const auto a = sat(f->kids[0]), b = sat(f->kids[1]);
                for (std::size_t i = 0; i < n; ++i) out[i] = f->kind == FKind::And ? (a[i] && b[i]) : (a[i] || b[i]);
                return out;
            }
            default: break;
        }
        std::vector<std::vector<std::uint8_t>> kids;
        for (const auto& k : f->kids) kids.push_back(sat(k));
        for (int s = 0; s < m_.n; ++s) out[static_cast<std::size_t>(s)] = all_lassos(s, f->kind, kids);
        return out;
    }

    bool holds(const masabs::FormulaPtr& f) {
        const auto s = sat(f);
        for (int i : m_.initial)
            if (!s[static_cast<std::size_t>(i)]) return false;
        return true;
    }

private:
    // Path formula on the lasso path[0..], looping back to index `loop`.
    bool path_holds(const std::vector<int>& path, masabs::FKind kind,
                    const std::vector<std::vector<std::uint8_t>>& kids) const {
        using masabs::FKind;
        auto at = [&](std::size_t pos, std::size_t which) { return kids[which][static_cast<std::size_t>(path[pos])] != 0; };
        switch (kind) {
            case FKind::AX: return path.size() > 1 ? at(1, 0) : at(0, 0);
            case FKind::AG:
                for (std::size_t i = 0; i < path.size(); ++i)
                    if (!at(i, 0)) return false;
                return true;
            case FKind::AU:
                for (std::size_t j = 0; j < path.size(); ++j) {
                    if (at(j, 1)) return true;
                    if (!at(j, 0) && !(strict_ && j == 0)) return false;
                }
                return false;
            default: throw std::logic_error("not a path operator");
        }
    }

    bool all_lassos(int s, masabs::FKind kind, const std::vector<std::vector<std::uint8_t>>& kids) {
        std::vector<int> path{s};
        std::vector<char> on(static_cast<std::size_t>(m_.n), 0);
        on[static_cast<std::size_t>(s)] = 1;
        bool ok = true;
        std::function<void()> dfs = [&]() {
            const int u = path.back();
            for (auto t : m_.successors(u)) {
                if (!ok) return;
                if (on[t]) {
                    // the lasso path + (cycle from t); the cycle re-enters at t, so
                    // the positions before the repeat cover the whole path
                    if (++used_ > budget_) throw TooManyLassos();
                    std::vector<int> lasso = path;
                    if (kind == masabs::FKind::AX && path.size() == 1) lasso.push_back(static_cast<int>(t));
                    if (!path_holds(lasso, kind, kids)) ok = false;
                    continue;
                }
                on[t] = 1;
                path.push_back(static_cast<int>(t));
                dfs();
                path.pop_back();
                on[t] = 0;
            }
        };
        dfs();
        return ok;
    }

    const masabs::Model& m_;
    bool strict_;
    std::size_t budget_;
    std::size_t used_ = 0;
};

}  // namespace oracle

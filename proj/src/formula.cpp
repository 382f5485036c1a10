#include "masabs/formula.hpp"

#include <algorithm>

#include <json.hpp>

#include "masabs/parser.hpp"

namespace masabs {

namespace fm {
namespace {
FormulaPtr make(FKind k, std::vector<FormulaPtr> kids = {}) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->kids = std::move(kids);
    return f;
}
}  // namespace

FormulaPtr truth() { return make(FKind::True); }
FormulaPtr falsity() { return make(FKind::False); }
FormulaPtr loc(std::string qualified) {
    auto f = std::make_shared<Formula>();
    f->kind = FKind::Atom;
    f->prop = std::move(qualified);
    return f;
}
FormulaPtr guard(ExprPtr g) {
    if (is_true_lit(g)) return truth();
    if (is_false_lit(g)) return falsity();
    auto f = std::make_shared<Formula>();
    f->kind = FKind::Atom;
    f->prop = to_string(g);
    f->guard = std::move(g);
    return f;
}
FormulaPtr negate_atom(FormulaPtr atom) {
    switch (atom->kind) {
        case FKind::True: return falsity();
        case FKind::False: return truth();
        case FKind::Atom:
        case FKind::NotAtom: {
            auto f = std::make_shared<Formula>(*atom);
            f->kind = atom->kind == FKind::Atom ? FKind::NotAtom : FKind::Atom;
            return f;
        }
        default: throw FormulaError("negate_atom applied to a compound formula");
    }
}
FormulaPtr conj(FormulaPtr a, FormulaPtr b) { return make(FKind::And, {std::move(a), std::move(b)}); }
FormulaPtr disj(FormulaPtr a, FormulaPtr b) { return make(FKind::Or, {std::move(a), std::move(b)}); }
FormulaPtr ax(FormulaPtr f) { return make(FKind::AX, {std::move(f)}); }
FormulaPtr au(FormulaPtr a, FormulaPtr b) { return make(FKind::AU, {std::move(a), std::move(b)}); }
FormulaPtr af(FormulaPtr f) { return au(truth(), std::move(f)); }
FormulaPtr ag(FormulaPtr f) { return make(FKind::AG, {std::move(f)}); }
}  // namespace fm

namespace {

FormulaPtr convert(const ExprPtr& e, bool negated) {
    if (!contains_formula_nodes(e)) return fm::guard(negated ? fold(ex::lnot(e)) : e);
    switch (e->kind) {
        case ExprKind::LocRef: {
            auto a = fm::loc(e->name);
            return negated ? fm::negate_atom(a) : a;
        }
        case ExprKind::Not: return convert(e->kids[0], !negated);
        case ExprKind::Binary:
            if (e->op == BinOp::And || e->op == BinOp::Or) {
                auto a = convert(e->kids[0], negated);
                auto b = convert(e->kids[1], negated);
                return (e->op == BinOp::And) != negated ? fm::conj(a, b) : fm::disj(a, b);
            }
            throw FormulaError("operator '" + std::string(to_symbol(e->op)) +
                               "' applied to a location or temporal formula");
        case ExprKind::TempAG:
        case ExprKind::TempAF:
        case ExprKind::TempAX:
        case ExprKind::TempAU: {
            if (negated)
                throw FormulaError("negated temporal operator in '" + to_string(e) +
                                   "' is outside the universal fragment");
            if (e->kind == ExprKind::TempAG) return fm::ag(convert(e->kids[0], false));
            if (e->kind == ExprKind::TempAF) return fm::af(convert(e->kids[0], false));
            if (e->kind == ExprKind::TempAX) return fm::ax(convert(e->kids[0], false));
            return fm::au(convert(e->kids[0], false), convert(e->kids[1], false));
        }
        default: throw FormulaError("unsupported formula node in '" + to_string(e) + "'");
    }
}

void collect_guards(const FormulaPtr& f, std::vector<ExprPtr>& out, std::set<std::string>& seen) {
    if (f->guard && seen.insert(f->prop).second) out.push_back(f->guard);
    for (const auto& k : f->kids) collect_guards(k, out, seen);
}

nlohmann::json to_json(const FormulaPtr& f) {
    static const char* names[] = {"true", "false", "atom", "not", "and", "or", "AX", "AU", "AG"};
    nlohmann::json j;
    j["op"] = names[static_cast<int>(f->kind)];
    if (f->kind == FKind::Atom || f->kind == FKind::NotAtom) {
        j["prop"] = f->prop;
        j["kind"] = f->guard ? "guard" : "location";
    }
    if (!f->kids.empty()) {
        j["args"] = nlohmann::json::array();
        for (const auto& k : f->kids) j["args"].push_back(to_json(k));
    }
    return j;
}

}  // namespace

FormulaPtr to_formula(const ExprPtr& e) { return convert(e, false); }

FormulaPtr parse_formula(const std::string& text, const MASGraph& mas) {
    return to_formula(parse_formula_expr(text, mas));
}

std::vector<ExprPtr> guard_atoms(const FormulaPtr& f) {
    std::vector<ExprPtr> out;
    std::set<std::string> seen;
    collect_guards(f, out, seen);
    return out;
}

std::set<std::string> formula_vars(const FormulaPtr& f) {
    std::set<std::string> out;
    for (const auto& g : guard_atoms(f)) out.merge(vars_of(g));
    return out;
}

std::string to_string(const FormulaPtr& f) {
    switch (f->kind) {
        case FKind::True: return "true";
        case FKind::False: return "false";
        case FKind::Atom: return f->prop;
        case FKind::NotAtom: return "!" + (f->guard ? "(" + f->prop + ")" : f->prop);
        case FKind::And: return "(" + to_string(f->kids[0]) + " && " + to_string(f->kids[1]) + ")";
        case FKind::Or: return "(" + to_string(f->kids[0]) + " || " + to_string(f->kids[1]) + ")";
        case FKind::AX: return "AX " + to_string(f->kids[0]);
        case FKind::AU:
            if (f->kids[0]->kind == FKind::True) return "A<> " + to_string(f->kids[1]);
            return "A(" + to_string(f->kids[0]) + " U " + to_string(f->kids[1]) + ")";
        case FKind::AG: return "A[] " + to_string(f->kids[0]);
    }
    return "?";
}

std::string formula_to_json(const FormulaPtr& f) { return to_json(f).dump(); }

int temporal_depth(const FormulaPtr& f) {
    int d = 0;
    for (const auto& k : f->kids) d = std::max(d, temporal_depth(k));
    const bool temporal = f->kind == FKind::AX || f->kind == FKind::AU || f->kind == FKind::AG;
    return d + (temporal ? 1 : 0);
}

}  // namespace masabs

#include "masabs/expr.hpp"

#include <sstream>
#include <stdexcept>

namespace masabs {

std::size_t Table::size() const {
    std::size_t n = 1;
    for (const auto& [lo, hi] : args) n *= static_cast<std::size_t>(hi - lo + 1);
    return n;
}

std::int64_t Table::index_of(const std::vector<std::int64_t>& argv) const {
    if (argv.size() != args.size()) return -1;
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto [lo, hi] = args[i];
        if (argv[i] < lo || argv[i] > hi) return -1;
        idx = idx * (hi - lo + 1) + (argv[i] - lo);
    }
    return idx;
}

namespace ex {
namespace {
ExprPtr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }
}  // namespace

ExprPtr integer(std::int64_t v) {
    ExprNode n;
    n.kind = ExprKind::Int;
    n.value = v;
    return make(std::move(n));
}

ExprPtr boolean(bool b) {
    ExprNode n;
    n.kind = ExprKind::Bool;
    n.value = b ? 1 : 0;
    return make(std::move(n));
}

ExprPtr truth() {
    static const ExprPtr t = boolean(true);
    return t;
}

ExprPtr falsity() {
    static const ExprPtr f = boolean(false);
    return f;
}

ExprPtr var(std::string name) {
    ExprNode n;
    n.kind = ExprKind::Var;
    n.name = std::move(name);
    return make(std::move(n));
}

ExprPtr index(std::string name, ExprPtr idx) {
    ExprNode n;
    n.kind = ExprKind::Index;
    n.name = std::move(name);
    n.kids = {std::move(idx)};
    return make(std::move(n));
}

ExprPtr array_lit(const std::vector<std::int64_t>& values) {
    ExprNode n;
    n.kind = ExprKind::ArrayLit;
    for (auto v : values) n.kids.push_back(integer(v));
    return make(std::move(n));
}

ExprPtr neg(ExprPtr e) {
    ExprNode n;
    n.kind = ExprKind::Neg;
    n.kids = {std::move(e)};
    return make(std::move(n));
}

ExprPtr lnot(ExprPtr e) {
    ExprNode n;
    n.kind = ExprKind::Not;
    n.kids = {std::move(e)};
    return make(std::move(n));
}

ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b) {
    ExprNode n;
    n.kind = ExprKind::Binary;
    n.op = op;
    n.kids = {std::move(a), std::move(b)};
    return make(std::move(n));
}

ExprPtr conj(ExprPtr a, ExprPtr b) {
    if (is_true_lit(a)) return b;
    if (is_true_lit(b)) return a;
    return bin(BinOp::And, std::move(a), std::move(b));
}

ExprPtr disj(ExprPtr a, ExprPtr b) {
    if (is_false_lit(a)) return b;
    if (is_false_lit(b)) return a;
    return bin(BinOp::Or, std::move(a), std::move(b));
}

ExprPtr eq(ExprPtr a, ExprPtr b) { return bin(BinOp::Eq, std::move(a), std::move(b)); }

ExprPtr lookup(TablePtr table, std::vector<ExprPtr> args) {
    ExprNode n;
    n.kind = ExprKind::Lookup;
    n.table = std::move(table);
    n.kids = std::move(args);
    return make(std::move(n));
}

ExprPtr loc_ref(std::string qualified) {
    ExprNode n;
    n.kind = ExprKind::LocRef;
    n.name = std::move(qualified);
    return make(std::move(n));
}

ExprPtr temporal(ExprKind kind, std::vector<ExprPtr> kids) {
    ExprNode n;
    n.kind = kind;
    n.kids = std::move(kids);
    return make(std::move(n));
}
}  // namespace ex

bool is_true_lit(const ExprPtr& e) { return e && e->kind == ExprKind::Bool && e->value != 0; }
bool is_false_lit(const ExprPtr& e) { return e && e->kind == ExprKind::Bool && e->value == 0; }

bool is_comparison(BinOp op) {
    switch (op) {
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge:
        case BinOp::Eq:
        case BinOp::Ne: return true;
        default: return false;
    }
}

bool is_boolean_op(BinOp op) { return op == BinOp::And || op == BinOp::Or; }

const char* to_symbol(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Mod: return "%";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::And: return "&&";
        case BinOp::Or: return "||";
    }
    return "?";
}

namespace {

std::string strip(const std::string& name, const std::string& agent) {
    if (!agent.empty() && name.size() > agent.size() + 1 && name.compare(0, agent.size(), agent) == 0 &&
        name[agent.size()] == '.')
        return name.substr(agent.size() + 1);
    return name;
}

void print(std::ostream& os, const ExprPtr& e, const std::string& agent) {
    switch (e->kind) {
        case ExprKind::Int: os << e->value; return;
        case ExprKind::Bool: os << (e->value ? "true" : "false"); return;
        case ExprKind::Var: os << strip(e->name, agent); return;
        case ExprKind::LocRef: os << e->name; return;
        case ExprKind::Index:
            os << strip(e->name, agent) << '[';
            print(os, e->kids[0], agent);
            os << ']';
            return;
        case ExprKind::ArrayLit:
            os << '[';
            for (std::size_t i = 0; i < e->kids.size(); ++i) {
                if (i) os << ", ";
                print(os, e->kids[i], agent);
            }
            os << ']';
            return;
        case ExprKind::Neg:
            os << "-(";
            print(os, e->kids[0], agent);
            os << ')';
            return;
        case ExprKind::Not:
            os << "!(";
            print(os, e->kids[0], agent);
            os << ')';
            return;
        case ExprKind::Binary:
            os << '(';
            print(os, e->kids[0], agent);
            os << ' ' << to_symbol(e->op) << ' ';
            print(os, e->kids[1], agent);
            os << ')';
            return;
        case ExprKind::Lookup:
            os << e->table->name << '(';
            for (std::size_t i = 0; i < e->kids.size(); ++i) {
                if (i) os << ", ";
                print(os, e->kids[i], agent);
            }
            os << ')';
            return;
        case ExprKind::TempAG: os << "A[] "; print(os, e->kids[0], agent); return;
        case ExprKind::TempAF: os << "A<> "; print(os, e->kids[0], agent); return;
        case ExprKind::TempAX: os << "AX "; print(os, e->kids[0], agent); return;
        case ExprKind::TempAU:
            os << "A(";
            print(os, e->kids[0], agent);
            os << " U ";
            print(os, e->kids[1], agent);
            os << ')';
            return;
    }
}

void collect_vars(const ExprPtr& e, std::set<std::string>& out) {
    if (e->kind == ExprKind::Var || e->kind == ExprKind::Index) out.insert(e->name);
    for (const auto& k : e->kids) collect_vars(k, out);
}

// Evaluates an operator over literal operands; false when it would fail.
bool apply_const(BinOp op, std::int64_t a, std::int64_t b, std::int64_t& out) {
    switch (op) {
        case BinOp::Add: out = a + b; return true;
        case BinOp::Sub: out = a - b; return true;
        case BinOp::Mul: out = a * b; return true;
        case BinOp::Div:
            if (b == 0) return false;
            out = a / b;
            return true;
        case BinOp::Mod:
            if (b == 0) return false;
            out = a % b;
            return true;
        case BinOp::Lt: out = a < b; return true;
        case BinOp::Le: out = a <= b; return true;
        case BinOp::Gt: out = a > b; return true;
        case BinOp::Ge: out = a >= b; return true;
        case BinOp::Eq: out = a == b; return true;
        case BinOp::Ne: out = a != b; return true;
        case BinOp::And: out = (a != 0) && (b != 0); return true;
        case BinOp::Or: out = (a != 0) || (b != 0); return true;
    }
    return false;
}

bool is_lit(const ExprPtr& e) { return e->kind == ExprKind::Int || e->kind == ExprKind::Bool; }

bool all_lit(const ExprPtr& arr) {
    for (const auto& k : arr->kids)
        if (!is_lit(k)) return false;
    return true;
}

}  // namespace

std::string to_string(const ExprPtr& e) {
    std::ostringstream os;
    print(os, e, "");
    return os.str();
}

std::string to_string_in(const ExprPtr& e, const std::string& agent) {
    std::ostringstream os;
    print(os, e, agent);
    return os.str();
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->value != b->value || a->name != b->name || a->kids.size() != b->kids.size())
        return false;
    if (a->kind == ExprKind::Binary && a->op != b->op) return false;
    if (a->kind == ExprKind::Lookup &&
        (a->table->name != b->table->name || a->table->values != b->table->values || a->table->args != b->table->args))
        return false;
    for (std::size_t i = 0; i < a->kids.size(); ++i)
        if (!structurally_equal(a->kids[i], b->kids[i])) return false;
    return true;
}

std::set<std::string> vars_of(const ExprPtr& e) {
    std::set<std::string> out;
    if (e) collect_vars(e, out);
    return out;
}

bool mentions_any(const ExprPtr& e, const std::set<std::string>& names) {
    if ((e->kind == ExprKind::Var || e->kind == ExprKind::Index) && names.count(e->name)) return true;
    for (const auto& k : e->kids)
        if (mentions_any(k, names)) return true;
    return false;
}

bool contains_formula_nodes(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::LocRef:
        case ExprKind::TempAG:
        case ExprKind::TempAF:
        case ExprKind::TempAX:
        case ExprKind::TempAU: return true;
        default: break;
    }
    for (const auto& k : e->kids)
        if (contains_formula_nodes(k)) return true;
    return false;
}

ExprPtr fold(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Int:
        case ExprKind::Bool:
        case ExprKind::Var:
        case ExprKind::LocRef: return e;
        default: break;
    }
    std::vector<ExprPtr> kids;
    kids.reserve(e->kids.size());
    bool changed = false;
    for (const auto& k : e->kids) {
        kids.push_back(fold(k));
        changed |= kids.back() != k;
    }
    auto rebuilt = [&]() -> ExprPtr {
        if (!changed) return e;
        ExprNode n = *e;
        n.kids = kids;
        return std::make_shared<const ExprNode>(std::move(n));
    };
    switch (e->kind) {
        case ExprKind::Neg:
            if (kids[0]->kind == ExprKind::Int) return ex::integer(-kids[0]->value);
            return rebuilt();
        case ExprKind::Not:
            if (kids[0]->kind == ExprKind::Bool) return ex::boolean(kids[0]->value == 0);
            return rebuilt();
        case ExprKind::Binary: {
            const auto& a = kids[0];
            const auto& b = kids[1];
            if (e->op == BinOp::And) {
                if (is_false_lit(a)) return ex::falsity();
                if (is_true_lit(a)) return b;
            } else if (e->op == BinOp::Or) {
                if (is_true_lit(a)) return ex::truth();
                if (is_false_lit(a)) return b;
            }
            if (is_lit(a) && is_lit(b)) {
                std::int64_t out = 0;
                if (apply_const(e->op, a->value, b->value, out)) {
                    if (is_comparison(e->op) || is_boolean_op(e->op)) return ex::boolean(out != 0);
                    return ex::integer(out);
                }
            }
            if ((e->op == BinOp::Eq || e->op == BinOp::Ne) && a->kind == ExprKind::ArrayLit &&
                b->kind == ExprKind::ArrayLit && all_lit(a) && all_lit(b) && a->kids.size() == b->kids.size()) {
                bool same = true;
                for (std::size_t i = 0; i < a->kids.size(); ++i) same &= a->kids[i]->value == b->kids[i]->value;
                return ex::boolean(e->op == BinOp::Eq ? same : !same);
            }
            return rebuilt();
        }
        case ExprKind::Lookup: {
            bool lits = true;
            std::vector<std::int64_t> argv;
            for (const auto& k : kids) {
                lits &= k->kind == ExprKind::Int;
                argv.push_back(k->value);
            }
            if (lits) {
                const auto idx = e->table->index_of(argv);
                if (idx >= 0) return ex::integer(e->table->values[static_cast<std::size_t>(idx)]);
            }
            return rebuilt();
        }
        default: return rebuilt();
    }
}

namespace {

const Binding* find_binding(const std::vector<Binding>& bs, const std::string& name) {
    for (const auto& b : bs)
        if (b.name == name) return &b;
    return nullptr;
}

TablePtr cells_table(const Binding& b) {
    auto t = std::make_shared<Table>();
    std::ostringstream nm;
    nm << "cells_" << b.name;
    for (auto v : b.values) nm << '_' << (v < 0 ? "m" : "") << (v < 0 ? -v : v);
    t->name = nm.str();
    for (auto& ch : t->name)
        if (ch == '.') ch = '_';
    t->args = {{b.index_lo, b.index_lo + static_cast<int>(b.values.size()) - 1}};
    for (auto v : b.values) t->values.push_back(static_cast<int>(v));
    return t;
}

ExprPtr subst_rec(const ExprPtr& e, const std::vector<Binding>& bs) {
    switch (e->kind) {
        case ExprKind::Var: {
            const auto* b = find_binding(bs, e->name);
            if (!b) return e;
            if (b->is_array) return ex::array_lit(b->values);
            return ex::integer(b->values.at(0));
        }
        case ExprKind::Index: {
            auto idx = fold(subst_rec(e->kids[0], bs));
            const auto* b = find_binding(bs, e->name);
            if (!b) return idx == e->kids[0] ? e : ex::index(e->name, idx);
            if (idx->kind == ExprKind::Int) {
                const auto off = idx->value - b->index_lo;
                if (off >= 0 && off < static_cast<std::int64_t>(b->values.size()))
                    return ex::integer(b->values[static_cast<std::size_t>(off)]);
            }
            return ex::lookup(cells_table(*b), {idx});
        }
        case ExprKind::Int:
        case ExprKind::Bool:
        case ExprKind::LocRef: return e;
        default: {
            ExprNode n = *e;
            bool changed = false;
            for (auto& k : n.kids) {
                auto nk = subst_rec(k, bs);
                changed |= nk != k;
                k = std::move(nk);
            }
            if (!changed) return e;
            return std::make_shared<const ExprNode>(std::move(n));
        }
    }
}

}  // namespace

ExprPtr substitute(const ExprPtr& e, const std::vector<Binding>& bindings) {
    return fold(subst_rec(e, bindings));
}

ExprPtr rename_var(const ExprPtr& e, const std::string& from, const std::string& to) {
    if ((e->kind == ExprKind::Var || e->kind == ExprKind::Index) && e->name == from) {
        ExprNode n = *e;
        n.name = to;
        for (auto& k : n.kids) k = rename_var(k, from, to);
        return std::make_shared<const ExprNode>(std::move(n));
    }
    if (e->kids.empty()) return e;
    ExprNode n = *e;
    bool changed = false;
    for (auto& k : n.kids) {
        auto nk = rename_var(k, from, to);
        changed |= nk != k;
        k = std::move(nk);
    }
    return changed ? std::make_shared<const ExprNode>(std::move(n)) : e;
}

}  // namespace masabs

#include "masabs/eval.hpp"

#include <algorithm>
#include <sstream>

namespace masabs {

Layout::Layout(std::vector<VarDecl> vars) : vars_(std::move(vars)) {
    std::sort(vars_.begin(), vars_.end(), [](const VarDecl& a, const VarDecl& b) { return a.name < b.name; });
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        const auto& v = vars_[i];
        if (!index_.emplace(v.name, static_cast<int>(i)).second)
            throw ValidationError("duplicate variable '" + v.name + "'");
        offsets_.push_back(slots_);
        for (int c = 0; c < v.cells(); ++c) {
            lo_.push_back(v.lo);
            hi_.push_back(v.hi);
            slot_var_.push_back(static_cast<int>(i));
        }
        slots_ += v.cells();
    }
}

const VarDecl* Layout::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &vars_[static_cast<std::size_t>(it->second)];
}

int Layout::offset(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : offsets_[static_cast<std::size_t>(it->second)];
}

std::vector<int> Layout::slots_of(const std::vector<std::string>& names) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (std::find(names.begin(), names.end(), vars_[i].name) == names.end()) continue;
        for (int c = 0; c < vars_[i].cells(); ++c) out.push_back(offsets_[i] + c);
    }
    return out;
}

std::string Layout::slot_name(int slot) const {
    const auto vi = static_cast<std::size_t>(slot_var_[static_cast<std::size_t>(slot)]);
    const auto& v = vars_[vi];
    if (!v.is_array()) return v.name;
    return v.name + "[" + std::to_string(v.index_lo + slot - offsets_[vi]) + "]";
}

Valuation Layout::initial() const {
    Valuation out;
    out.reserve(static_cast<std::size_t>(slots_));
    for (const auto& v : vars_) {
        for (int c = 0; c < v.cells(); ++c)
            out.push_back(c < static_cast<int>(v.init.size()) ? v.init[static_cast<std::size_t>(c)] : v.lo);
    }
    return out;
}

namespace {

bool is_array_operand(const ExprPtr& e, const Layout& layout, int& len) {
    if (e->kind == ExprKind::ArrayLit) {
        len = static_cast<int>(e->kids.size());
        return true;
    }
    if (e->kind == ExprKind::Var) {
        const auto* d = layout.find(e->name);
        if (d && d->is_array()) {
            len = d->length;
            return true;
        }
    }
    return false;
}

Op arith_op(BinOp op) {
    switch (op) {
        case BinOp::Add: return Op::Add;
        case BinOp::Sub: return Op::Sub;
        case BinOp::Mul: return Op::Mul;
        case BinOp::Div: return Op::Div;
        case BinOp::Mod: return Op::Mod;
        case BinOp::Lt: return Op::Lt;
        case BinOp::Le: return Op::Le;
        case BinOp::Gt: return Op::Gt;
        case BinOp::Ge: return Op::Ge;
        case BinOp::Eq: return Op::Eq;
        case BinOp::Ne: return Op::Ne;
        default: return Op::Pop;
    }
}

}  // namespace

Code::Code(const ExprPtr& e, const Layout& layout) {
    emit(e, layout);
    // Pad the high-water mark for LoadRange / ArrayLit bursts.
    max_depth_ += 1;
}

int Code::push(Instr i) {
    instrs_.push_back(i);
    return static_cast<int>(instrs_.size()) - 1;
}

void Code::emit(const ExprPtr& e, const Layout& layout) {
    auto grow = [&](int n) {
        depth_ += n;
        max_depth_ = std::max(max_depth_, depth_);
    };
    switch (e->kind) {
        case ExprKind::Int:
        case ExprKind::Bool:
            push({Op::Const, 0, 0, 0, e->value});
            grow(1);
            return;
        case ExprKind::Var: {
            const auto* d = layout.find(e->name);
            if (!d) throw ValidationError("unknown variable '" + e->name + "'");
            if (d->is_array()) {
                push({Op::LoadRange, layout.offset(e->name), d->length});
                grow(d->length);
            } else {
                push({Op::Load, layout.offset(e->name)});
                grow(1);
            }
            return;
        }
        case ExprKind::Index: {
            const auto* d = layout.find(e->name);
            if (!d || !d->is_array()) throw ValidationError("unknown array '" + e->name + "'");
            emit(e->kids[0], layout);
            push({Op::LoadIdx, layout.offset(e->name), d->index_lo, d->length});
            return;
        }
        case ExprKind::ArrayLit:
            for (const auto& k : e->kids) emit(k, layout);
            return;
        case ExprKind::Neg:
            emit(e->kids[0], layout);
            push({Op::Neg});
            return;
        case ExprKind::Not:
            emit(e->kids[0], layout);
            push({Op::Not});
            return;
        case ExprKind::Binary: {
            if (e->op == BinOp::And || e->op == BinOp::Or) {
                emit(e->kids[0], layout);
                const int jmp = push({e->op == BinOp::And ? Op::JmpFalseKeep : Op::JmpTrueKeep});
                push({Op::Pop});
                grow(-1);
                emit(e->kids[1], layout);
                instrs_[static_cast<std::size_t>(jmp)].a = static_cast<int>(instrs_.size());
                return;
            }
            int la = 0, lb = 0;
            if ((e->op == BinOp::Eq || e->op == BinOp::Ne) && is_array_operand(e->kids[0], layout, la) &&
                is_array_operand(e->kids[1], layout, lb)) {
                if (la != lb) throw ValidationError("array length mismatch in " + to_string(e));
                emit(e->kids[0], layout);
                emit(e->kids[1], layout);
                push({e->op == BinOp::Eq ? Op::ArrEq : Op::ArrNe, la});
                grow(1 - 2 * la);
                return;
            }
            emit(e->kids[0], layout);
            emit(e->kids[1], layout);
            push({arith_op(e->op)});
            grow(-1);
            return;
        }
        case ExprKind::Lookup: {
            for (const auto& k : e->kids) emit(k, layout);
            tables_.push_back(e->table);
            push({Op::Lookup, static_cast<int>(tables_.size()) - 1, static_cast<int>(e->kids.size())});
            grow(1 - static_cast<int>(e->kids.size()));
            return;
        }
        default: throw ValidationError("temporal or location operator outside a formula: " + to_string(e));
    }
}

std::optional<std::int64_t> Code::run(std::span<const int> val) const {
    std::int64_t local[64];
    std::vector<std::int64_t> heap;
    std::int64_t* st = local;
    if (max_depth_ > 64) {
        heap.resize(static_cast<std::size_t>(max_depth_));
        st = heap.data();
    }
    int sp = 0;
    const auto n = instrs_.size();
    for (std::size_t pc = 0; pc < n; ++pc) {
        const Instr& in = instrs_[pc];
        switch (in.op) {
            case Op::Const: st[sp++] = in.v; break;
            case Op::Load: st[sp++] = val[static_cast<std::size_t>(in.a)]; break;
            case Op::LoadIdx: {
                const auto off = st[sp - 1] - in.b;
                if (off < 0 || off >= in.c) return std::nullopt;
                st[sp - 1] = val[static_cast<std::size_t>(in.a + off)];
                break;
            }
            case Op::LoadRange:
                for (int i = 0; i < in.b; ++i) st[sp++] = val[static_cast<std::size_t>(in.a + i)];
                break;
            case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
            case Op::Not: st[sp - 1] = st[sp - 1] == 0; break;
            case Op::Add: st[sp - 2] += st[sp - 1]; --sp; break;
            case Op::Sub: st[sp - 2] -= st[sp - 1]; --sp; break;
            case Op::Mul: st[sp - 2] *= st[sp - 1]; --sp; break;
            case Op::Div:
                if (st[sp - 1] == 0) return std::nullopt;
                st[sp - 2] /= st[sp - 1];
                --sp;
                break;
            case Op::Mod:
                if (st[sp - 1] == 0) return std::nullopt;
                st[sp - 2] %= st[sp - 1];
                --sp;
                break;
            case Op::Lt: st[sp - 2] = st[sp - 2] < st[sp - 1]; --sp; break;
            case Op::Le: st[sp - 2] = st[sp - 2] <= st[sp - 1]; --sp; break;
            case Op::Gt: st[sp - 2] = st[sp - 2] > st[sp - 1]; --sp; break;
            case Op::Ge: st[sp - 2] = st[sp - 2] >= st[sp - 1]; --sp; break;
            case Op::Eq: st[sp - 2] = st[sp - 2] == st[sp - 1]; --sp; break;
            case Op::Ne: st[sp - 2] = st[sp - 2] != st[sp - 1]; --sp; break;
            case Op::ArrEq:
            case Op::ArrNe: {
                const int len = in.a;
                bool same = true;
                for (int i = 0; i < len; ++i) same &= st[sp - 2 * len + i] == st[sp - len + i];
                sp -= 2 * len;
                st[sp++] = (in.op == Op::ArrEq) == same;
                break;
            }
            case Op::Lookup: {
                const auto& t = *tables_[static_cast<std::size_t>(in.a)];
                std::int64_t idx = 0;
                for (int i = 0; i < in.b; ++i) {
                    const auto [lo, hi] = t.args[static_cast<std::size_t>(i)];
                    const auto x = st[sp - in.b + i];
                    if (x < lo || x > hi) return std::nullopt;
                    idx = idx * (hi - lo + 1) + (x - lo);
                }
                sp -= in.b;
                st[sp++] = t.values[static_cast<std::size_t>(idx)];
                break;
            }
            case Op::JmpFalseKeep:
                if (st[sp - 1] == 0) pc = static_cast<std::size_t>(in.a) - 1;
                break;
            case Op::JmpTrueKeep:
                if (st[sp - 1] != 0) pc = static_cast<std::size_t>(in.a) - 1;
                break;
            case Op::Pop: --sp; break;
        }
    }
    return st[0];
}

CompiledUpdate::CompiledUpdate(const Update& u, const Layout& layout) {
    for (const auto& a : u) {
        CompiledAssign ca;
        const auto* d = layout.find(a.lhs->name);
        if (!d) throw ValidationError("unknown assignment target '" + a.lhs->name + "'");
        ca.lo = d->lo;
        ca.hi = d->hi;
        if (a.lhs->kind == ExprKind::Var) {
            if (d->is_array()) throw ValidationError("whole-array assignment to '" + d->name + "'");
            ca.slot = layout.offset(d->name);
        } else {
            ca.base = layout.offset(d->name);
            ca.index_lo = d->index_lo;
            ca.length = d->length;
            const auto& idx = a.lhs->kids[0];
            if (idx->kind == ExprKind::Int && idx->value >= d->index_lo && idx->value < d->index_lo + d->length)
                ca.slot = ca.base + static_cast<int>(idx->value) - d->index_lo;
            else
                ca.index = Code(idx, layout);
        }
        ca.rhs = Code(a.rhs, layout);
        atoms_.push_back(std::move(ca));
    }
}

bool CompiledUpdate::apply(std::vector<int>& val) const {
    for (const auto& a : atoms_) {
        const auto r = a.rhs.run(val);
        if (!r || *r < a.lo || *r > a.hi) return false;
        int slot = a.slot;
        if (slot < 0) {
            const auto i = a.index.run(val);
            if (!i) return false;
            const auto off = *i - a.index_lo;
            if (off < 0 || off >= a.length) return false;
            slot = a.base + static_cast<int>(off);
        }
        val[static_cast<std::size_t>(slot)] = static_cast<int>(*r);
    }
    return true;
}

std::optional<std::int64_t> eval_expr(const ExprPtr& e, const Layout& layout, std::span<const int> val) {
    return Code(e, layout).run(val);
}

std::optional<Valuation> effect(const Update& u, const Layout& layout, const Valuation& val) {
    Valuation out = val;
    if (!CompiledUpdate(u, layout).apply(out)) return std::nullopt;
    return out;
}

void for_each_valuation(const std::vector<std::pair<int, int>>& ranges,
                        const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> cur;
    cur.reserve(ranges.size());
    for (const auto& [lo, hi] : ranges) {
        if (hi < lo) return;
        cur.push_back(lo);
    }
    while (true) {
        fn(cur);
        int i = static_cast<int>(ranges.size()) - 1;
        while (i >= 0) {
            auto& c = cur[static_cast<std::size_t>(i)];
            if (c < ranges[static_cast<std::size_t>(i)].second) {
                ++c;
                break;
            }
            c = ranges[static_cast<std::size_t>(i)].first;
            --i;
        }
        if (i < 0) return;
    }
}

std::vector<Valuation> sat(const ExprPtr& g, const std::vector<VarDecl>& over, std::vector<std::string>* diagnostics) {
    const Layout layout(over);
    const Code code(g, layout);
    std::vector<std::pair<int, int>> ranges;
    for (int s = 0; s < layout.slot_count(); ++s) ranges.emplace_back(layout.slot_lo(s), layout.slot_hi(s));
    std::vector<Valuation> out;
    std::size_t errors = 0;
    for_each_valuation(ranges, [&](const std::vector<int>& v) {
        const auto r = code.run(v);
        if (!r) {
            ++errors;
            return;
        }
        if (*r) out.push_back(v);
    });
    if (errors && diagnostics) {
        std::ostringstream os;
        os << "sat: " << errors << " evaluation(s) of " << to_string(g) << " raised an error and were excluded";
        diagnostics->push_back(os.str());
    }
    return out;
}

}  // namespace masabs

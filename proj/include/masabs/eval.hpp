#pragma once

// Evaluation of guards and updates over variable evaluations.
//
// Integer division truncates toward zero and x % y takes the sign of x.
// Division or modulo by zero, an array index out of bounds, a lookup outside
// its table and an assignment of a value outside the target's domain are
// evaluation errors; callers treat the edge as disabled.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "masabs/mas.hpp"

namespace masabs {

/// Values of all slots (array cells expanded) under a fixed variable order.
using Valuation = std::vector<int>;

/// Fixed enumeration of variables: sorted by name, arrays laid out cell by cell.
class Layout {
public:
    Layout() = default;
    explicit Layout(std::vector<VarDecl> vars);

    const std::vector<VarDecl>& vars() const { return vars_; }
    int slot_count() const { return slots_; }
    const VarDecl* find(const std::string& name) const;
    /// First slot of a variable, -1 when unknown.
    int offset(const std::string& name) const;
    /// Slots of the named variables in layout order.
    std::vector<int> slots_of(const std::vector<std::string>& names) const;
    std::string slot_name(int slot) const;
    int slot_lo(int slot) const { return lo_[static_cast<std::size_t>(slot)]; }
    int slot_hi(int slot) const { return hi_[static_cast<std::size_t>(slot)]; }
    Valuation initial() const;

private:
    std::vector<VarDecl> vars_;
    std::unordered_map<std::string, int> index_;
    std::vector<int> offsets_;
    std::vector<int> lo_, hi_;
    std::vector<int> slot_var_;
    int slots_ = 0;
};

enum class Op : std::uint8_t {
    Const, Load, LoadIdx, LoadRange, Neg, Not,
    Add, Sub, Mul, Div, Mod, Lt, Le, Gt, Ge, Eq, Ne,
    ArrEq, ArrNe, Lookup, JmpFalseKeep, JmpTrueKeep, Pop,
};

struct Instr {
    Op op;
    int a = 0;
    int b = 0;
    int c = 0;
    std::int64_t v = 0;
};

/// Expression compiled against a Layout into postfix stack code.
class Code {
public:
    Code() = default;
    Code(const ExprPtr& e, const Layout& layout);

    std::optional<std::int64_t> run(std::span<const int> val) const;
    bool holds(std::span<const int> val) const {
        auto r = run(val);
        return r && *r != 0;
    }
    bool empty() const { return instrs_.empty(); }

private:
    void emit(const ExprPtr& e, const Layout& layout);
    int push(Instr i);

    std::vector<Instr> instrs_;
    std::vector<TablePtr> tables_;
    int depth_ = 0;
    int max_depth_ = 0;
};

struct CompiledAssign {
    int slot = -1;      // fixed target slot, or -1 when indexed at run time
    int base = 0;       // indexed targets
    int index_lo = 0;
    int length = 0;
    int lo = 0;         // target domain
    int hi = 0;
    Code index;
    Code rhs;
};

class CompiledUpdate {
public:
    CompiledUpdate() = default;
    CompiledUpdate(const Update& u, const Layout& layout);
    /// Applies the atoms left to right in place; false on an evaluation error
    /// (the valuation is then unspecified).
    bool apply(std::vector<int>& val) const;
    bool empty() const { return atoms_.empty(); }

private:
    std::vector<CompiledAssign> atoms_;
};

/// Convenience: compile and run once.
std::optional<std::int64_t> eval_expr(const ExprPtr& e, const Layout& layout, std::span<const int> val);
/// Effect of an update; nullopt on evaluation error.
std::optional<Valuation> effect(const Update& u, const Layout& layout, const Valuation& val);

/// Visits every valuation of the given slot ranges (odometer order, last slot fastest).
void for_each_valuation(const std::vector<std::pair<int, int>>& ranges,
                        const std::function<void(const std::vector<int>&)>& fn);

/// Satisfying evaluations of a boolean guard over the variables `over`,
/// each laid out by Layout(over). Evaluations that raise an error are
/// excluded and reported through `diagnostics` when given.
std::vector<Valuation> sat(const ExprPtr& g, const std::vector<VarDecl>& over,
                           std::vector<std::string>* diagnostics = nullptr);

}  // namespace masabs

#pragma once

// Guard / update expression trees over bounded-integer variables.
//
// Expressions are immutable and shared by pointer. Variable references carry
// fully-qualified names ("Agent.var" for locals, plain names for shared
// variables); binding to evaluation slots happens in eval.hpp.

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace masabs {

enum class ExprKind {
    Int,       // integer literal
    Bool,      // boolean literal
    Var,       // scalar variable, or whole array when used in ==/!=
    Index,     // array cell: name[kids[0]]
    ArrayLit,  // [v0, v1, ...]; only as an operand of ==/!=
    Neg,
    Not,
    Binary,
    Lookup,    // table(kids...)
    // formula-only nodes, rejected in guards and updates
    LocRef,
    TempAG,
    TempAF,
    TempAX,
    TempAU,
};

enum class BinOp { Add, Sub, Mul, Div, Mod, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

/// Finite function over a box of integer arguments, stored row-major.
struct Table {
    std::string name;
    std::vector<std::pair<int, int>> args;  // inclusive ranges
    std::vector<int> values;

    std::size_t size() const;
    /// Returns -1 when any argument is outside its range.
    std::int64_t index_of(const std::vector<std::int64_t>& argv) const;
};
using TablePtr = std::shared_ptr<const Table>;

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind = ExprKind::Int;
    BinOp op = BinOp::Add;
    std::int64_t value = 0;
    std::string name;  // Var / Index / LocRef
    std::vector<ExprPtr> kids;
    TablePtr table;
};

namespace ex {
ExprPtr integer(std::int64_t v);
ExprPtr boolean(bool b);
ExprPtr truth();
ExprPtr falsity();
ExprPtr var(std::string name);
ExprPtr index(std::string name, ExprPtr idx);
ExprPtr array_lit(const std::vector<std::int64_t>& values);
ExprPtr neg(ExprPtr e);
ExprPtr lnot(ExprPtr e);
ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b);
ExprPtr conj(ExprPtr a, ExprPtr b);
ExprPtr disj(ExprPtr a, ExprPtr b);
ExprPtr eq(ExprPtr a, ExprPtr b);
ExprPtr lookup(TablePtr table, std::vector<ExprPtr> args);
ExprPtr loc_ref(std::string qualified);
ExprPtr temporal(ExprKind kind, std::vector<ExprPtr> kids);
}  // namespace ex

bool is_true_lit(const ExprPtr& e);
bool is_false_lit(const ExprPtr& e);
bool is_comparison(BinOp op);
bool is_boolean_op(BinOp op);
const char* to_symbol(BinOp op);

/// Canonical, fully parenthesised text. Used for printing, DOT labels and
/// structural identity of formula atoms.
std::string to_string(const ExprPtr& e);

/// Same as to_string but drops the "<agent>." prefix of locals owned by
/// `agent`, for emitting agent blocks of the text format.
std::string to_string_in(const ExprPtr& e, const std::string& agent);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

/// Free variables (array names count as one variable).
std::set<std::string> vars_of(const ExprPtr& e);
bool mentions_any(const ExprPtr& e, const std::set<std::string>& names);
bool contains_formula_nodes(const ExprPtr& e);

/// Rebuilds `e` with every maximal literal sub-tree folded. Only folds that
/// cannot hide an evaluation error are applied (left-operand short circuits
/// and fully constant operands).
ExprPtr fold(const ExprPtr& e);

/// Values assigned to variables by a substitution. Scalars use one value,
/// arrays one value per cell in index order.
struct Binding {
    std::string name;
    int index_lo = 0;
    std::vector<std::int64_t> values;
    bool is_array = false;
};

/// r[V=c] followed by constant folding. Array cells indexed by a
/// non-constant expression become a table lookup.
ExprPtr substitute(const ExprPtr& e, const std::vector<Binding>& bindings);

/// Replace references to variable `from` by variable `to` (renaming).
ExprPtr rename_var(const ExprPtr& e, const std::string& from, const std::string& to);

}  // namespace masabs

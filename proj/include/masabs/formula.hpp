#pragma once

// Universal branching-time formulas in which every temporal operator sits
// directly under the path quantifier A. Negation only appears on atoms.

#include <memory>
#include <string>
#include <vector>

#include "masabs/mas.hpp"

namespace masabs {

enum class FKind {
    True,
    False,
    Atom,     // proposition `prop`; guard atoms also carry `guard`
    NotAtom,  // negated proposition
    And,
    Or,
    AX,
    AU,  // A(kids[0] U kids[1]); A<> f is A(true U f)
    AG,
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    FKind kind = FKind::True;
    std::string prop;  // label name: "Agent.loc" or to_string(guard)
    ExprPtr guard;     // null for location atoms
    std::vector<FormulaPtr> kids;
};

class FormulaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace fm {
FormulaPtr truth();
FormulaPtr falsity();
FormulaPtr loc(std::string qualified);
FormulaPtr guard(ExprPtr g);
FormulaPtr negate_atom(FormulaPtr atom);
FormulaPtr conj(FormulaPtr a, FormulaPtr b);
FormulaPtr disj(FormulaPtr a, FormulaPtr b);
FormulaPtr ax(FormulaPtr f);
FormulaPtr au(FormulaPtr a, FormulaPtr b);
FormulaPtr af(FormulaPtr f);
FormulaPtr ag(FormulaPtr f);
}  // namespace fm

/// Converts a tree from parse_formula_expr. Maximal sub-trees without
/// locations or temporal operators become guard atoms; negations are pushed
/// to the atoms. Throws FormulaError on a negated temporal operator.
FormulaPtr to_formula(const ExprPtr& e);

/// parse_formula_expr + to_formula; parse errors propagate as ParseError.
FormulaPtr parse_formula(const std::string& text, const MASGraph& mas);

/// Guard atoms in first-occurrence order (request them when unwrapping).
std::vector<ExprPtr> guard_atoms(const FormulaPtr& f);
/// Variables mentioned by guard atoms.
std::set<std::string> formula_vars(const FormulaPtr& f);

std::string to_string(const FormulaPtr& f);
std::string formula_to_json(const FormulaPtr& f);
int temporal_depth(const FormulaPtr& f);

}  // namespace masabs

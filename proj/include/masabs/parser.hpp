#pragma once

// Reader for the .masg text format and for formula / guard expressions
// written against a parsed system. The grammar is documented in
// docs/grammar.md.

#include <stdexcept>
#include <string>

#include "masabs/mas.hpp"

namespace masabs {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int col, const std::string& msg);
    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

/// Parses and validates a system. Select binders are expanded into edge
/// copies; `init` fixes the initial values of the variables it mentions and
/// must have exactly one solution.
MASGraph parse_mas(const std::string& text);
MASGraph load_mas(const std::string& path);

/// A boolean expression over the variables of `mas`. Fully qualified names
/// ("Agent.var") always work; bare names resolve to a shared variable or to
/// the unique local of that name.
ExprPtr parse_guard(const std::string& text, const MASGraph& mas);

/// Like parse_guard, additionally accepting location names (bare when
/// unique, otherwise "Agent.loc"), `imply`, and the operators A[], A<>, AX
/// and A(f U g). Returns the raw tree; see formula.hpp for the checked form.
ExprPtr parse_formula_expr(const std::string& text, const MASGraph& mas);

}  // namespace masabs

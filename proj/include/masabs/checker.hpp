#pragma once

// Fixpoint model checking of universal formulas on explicit models.

#include <cstdint>
#include <string>
#include <vector>

#include "masabs/formula.hpp"
#include "masabs/model.hpp"

namespace masabs {

struct CheckOptions {
    /// Until whose left operand is not required at the first position of
    /// the path (only from the second state on).
    bool strict_until = false;
};

/// Infinite path prefix + cycle; the path is prefix followed by cycle repeated.
struct Lasso {
    std::vector<int> prefix;
    std::vector<int> cycle;
};

struct Verdict {
    bool holds = true;
    int failing_initial = -1;
    /// Counterexample for a violated top-level AG, AU or AX, starting at failing_initial.
    bool has_witness = false;
    Lasso witness;
};

/// States satisfying f, as a 0/1 vector of size m.n.
std::vector<std::uint8_t> satisfying_states(const Model& m, const FormulaPtr& f, const CheckOptions& opts = {});

/// m satisfies f when every initial state does. Unknown propositions throw DefectError.
Verdict check(const Model& m, const FormulaPtr& f, const CheckOptions& opts = {});
bool check_at(const Model& m, int state, const FormulaPtr& f, const CheckOptions& opts = {});

/// True when every transition of the lasso exists in m.
bool lasso_is_path(const Model& m, const Lasso& l);

std::string verdict_to_json(const Verdict& v, const Model& m);

}  // namespace masabs

#pragma once

// Simulation preorders between models over a set of propositions.
//
// A relation R is a simulation of a by b when related states agree on the
// observed propositions, every initial state of a is related to some
// initial state of b, and every move of the left state is matched by a move
// of the right state into a related pair.

#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "masabs/model.hpp"

namespace masabs {

struct SimulationResult {
    bool found = false;
    std::vector<std::pair<int, int>> relation;  // greatest simulation, sorted
    // when not found: an initial state of `a` that no initial state of `b` simulates
    int blocked_left = -1;
    int blocked_right = -1;     // an initial state of b it was compared with (-1 if b has none)
    int unmatched_move = -1;    // successor of blocked_left that blocked_right cannot follow; -1 when labels differ
    std::string reason;
};

/// Label compatibility of a state of `a` with a state of `b`.
using Compat = std::function<bool(int, int)>;

SimulationResult greatest_simulation(const Model& a, const Model& b, const Compat& compat);

/// Compatibility = equal truth values of every proposition in `ap` (both
/// models must be labelled with them).
SimulationResult check_simulation(const Model& a, const Model& b, const std::vector<std::string>& ap);

/// Compatibility = same location tuple and equal values of the variables in
/// `vars`, which both models must carry. Equivalent to observing every
/// location and every atom over `vars`.
SimulationResult check_simulation_vars(const Model& a, const Model& b, const std::set<std::string>& vars);

/// Same location tuple and equal values of `vars`.
bool check_state_match(const Model& a, int s1, const Model& b, int s2, const std::set<std::string>& vars);

/// Re-checks every clause for `relation` directly. Empty string when it is a
/// simulation, otherwise the first violated clause.
std::string verify_simulation(const Model& a, const Model& b, const Compat& compat,
                              const std::vector<std::pair<int, int>>& relation);

/// Compat functor used by check_simulation_vars.
Compat state_match(const Model& a, const Model& b, const std::set<std::string>& vars);

}  // namespace masabs

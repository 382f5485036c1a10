#pragma once

// Product of the agents of a MAS graph: interleaving for unsynchronised
// edges, one joint edge per matching send/receive pair.

#include <map>
#include <string>
#include <vector>

#include "masabs/mas.hpp"

namespace masabs {

struct CombinedEdge {
    int src = 0;
    int dst = 0;
    ExprPtr guard;
    Update update;  // sender atoms first, then receiver atoms
    /// (agent, edge index) of each contributing agent edge; the sender
    /// comes first for a synchronised pair.
    std::vector<std::pair<int, int>> provenance;
};

struct CombinedGraph {
    std::vector<std::string> agent_names;
    std::vector<std::vector<std::string>> agent_locations;
    /// One component per agent, in agent declaration order; sorted
    /// lexicographically.
    std::vector<std::vector<int>> locations;
    int initial = 0;
    std::vector<VarDecl> vars;  // sorted by name
    ExprPtr g0;
    std::vector<CombinedEdge> edges;

    int location_count() const { return static_cast<int>(locations.size()); }
    int find_location(const std::vector<int>& tuple) const;
    /// "<idle,idle>"
    std::string location_name(int l) const;
    /// Edge indices grouped by source location.
    std::vector<std::vector<int>> out_edges() const;
    /// Same as `location_name` but with agent-qualified components, used for
    /// location propositions: {"Voter.idle", "Coercer.idle"}.
    std::vector<std::string> location_props(int l) const;
};

/// Full product over Loc_1 x ... x Loc_n. Sends with no receiver in any
/// other agent are reported through `warnings`.
CombinedGraph combine(const MASGraph& mas, std::vector<std::string>* warnings = nullptr);

/// Drops locations not reachable from the initial location in the
/// location digraph (guards ignored). Location order is preserved.
CombinedGraph restrict_to_reachable_locations(const CombinedGraph& g);

/// combine followed by restrict_to_reachable_locations, without building
/// the full product.
CombinedGraph combine_reachable(const MASGraph& mas, std::vector<std::string>* warnings = nullptr);

}  // namespace masabs

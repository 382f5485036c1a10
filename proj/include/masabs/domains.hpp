#pragma once

// Per-location approximations of the values a set of variables can take.
//
// Upper mode over-approximates: every reachable state <l, eta> has eta(V)
// in d(V, l). Lower mode under-approximates: every vector in d(V, l) is
// witnessed by some reachable state at l.

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "masabs/composition.hpp"

namespace masabs {

enum class DomainMode { Upper, Lower };

using ValueVec = std::vector<int>;
using VecSet = std::set<ValueVec>;

struct LocalDomain {
    DomainMode mode = DomainMode::Upper;
    std::vector<VarDecl> vars;  // tracked set, sorted; vectors follow Layout(vars)
    std::vector<VecSet> table;  // per location of the graph it was computed on
    /// Lower mode: the exploration finished within its budget, so the table
    /// holds exactly the reachable projections. Always true in upper mode.
    bool complete = true;
    /// Upper mode: some edge image fell back to the coarse write-anything bound.
    bool coarse = false;
    std::size_t visits = 0;       // locations extracted from the worklist
    std::size_t edge_images = 0;  // edge image evaluations
};

struct NarrowedDomain {
    int agent = 0;
    DomainMode mode = DomainMode::Upper;
    std::vector<VarDecl> vars;
    std::vector<VecSet> table;  // per location of the agent
    bool complete = true;
};

struct DomainOptions {
    bool fifo = false;  // plain FIFO worklist instead of reachability-index priority
    std::size_t enum_budget = std::size_t{1} << 20;    // per edge image, evaluations per source vector
    std::size_t lower_budget = std::size_t{20} << 20;  // stored (location, vector) pairs in lower mode
};

/// r(l) = number of locations other than l reachable from l, guards ignored.
std::vector<int> reachability_index(const CombinedGraph& g);

/// `vars` are fully qualified variable names of g.
LocalDomain approx_local_domain(const CombinedGraph& g, const std::vector<std::string>& vars, DomainMode mode,
                                const DomainOptions& opts = {});

/// Union over the combined locations whose `agent` component is each local location.
NarrowedDomain narrow(const LocalDomain& d, const CombinedGraph& g, int agent);

/// Domain of one agent analysed on its own: upper mode erases synchronisation
/// labels, lower mode deletes synchronising edges. Other agents' variables
/// are not tracked; table is indexed by the agent's locations.
LocalDomain template_domain(const MASGraph& mas, int agent, const std::vector<std::string>& vars, DomainMode mode,
                            const DomainOptions& opts = {});

/// Image of d(src) through one edge, as computed by the upper-mode worklist.
VecSet edge_image(const CombinedGraph& g, const CombinedEdge& e, const LocalDomain& d, const DomainOptions& opts = {});

/// True when no edge image adds a vector outside the table (one full sweep is a no-op).
bool is_stable(const CombinedGraph& g, const LocalDomain& d, const DomainOptions& opts = {});

std::string domain_to_json(const LocalDomain& d, const CombinedGraph& g);

}  // namespace masabs

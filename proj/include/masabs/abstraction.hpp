#pragma once

// Abstraction of agent graphs by removing local variables or merging them
// into fresh variables through a finite function, optionally only inside a
// set of locations (a scope).
//
// Every edge l -> l' is instantiated once per value vector the abstracted
// sources can hold at l (per the local domain), with the sources replaced by
// that vector. May abstractions use the upper domain and simulate the
// concrete system; where an instance can fire on the abstraction of a
// concrete deadlock, a guarded self-loop at its location stands in for the
// deadlock's closure loop. Must abstractions use the lower domain; an edge is only
// "supported" when every instance behaves exactly like the concrete edge on
// every state it can be fired from, which is what makes the concrete system
// simulate the abstraction.

#include <optional>
#include <string>
#include <vector>

#include "masabs/domains.hpp"

namespace masabs {

enum class AbsMode { May, Must };

struct Mapping {
    std::string agent;
    std::vector<std::string> sources;  // fully qualified locals of `agent`
    /// Fresh variable receiving fn(sources); none for plain removal. A
    /// domain with lo > hi is replaced by the range of fn.
    std::optional<VarDecl> target;
    /// One argument per source cell (sources in order, cells in index order).
    TablePtr fn;
    /// Locations of `agent` where the mapping applies; none = everywhere.
    /// Scoped sources stay declared and hold `reset` inside the scope.
    std::optional<std::vector<std::string>> scope;
    std::optional<std::vector<int>> reset;  // per source cell; default: initial values
    std::optional<int> outside_default;     // target value outside the scope; default fn(initial)
};

struct AbstractionOptions {
    AbsMode mode = AbsMode::May;
    DomainOptions domain;
    /// Evaluations allowed for the exactness check of one must-mode edge.
    std::size_t check_budget = std::size_t{1} << 22;
};

struct AbstractionReport {
    std::size_t edges_in = 0;
    std::size_t edges_out = 0;
    std::size_t instances = 0;        // (edge, value vector) pairs considered
    std::size_t pruned = 0;           // instances whose guard folded to false
    std::size_t forks = 0;            // extra variants from values unknown mid-update
    std::size_t stutters = 0;         // may mode: guarded self-loops added for concrete deadlocks
    std::size_t unsupported_edges = 0;  // must mode only
    bool domain_complete = true;
    bool supported = true;  // must mode: every transformed edge passed the exactness check
    std::vector<std::string> diagnostics;
    double domain_ms = 0;
    double transform_ms = 0;
};

class AbstractionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Combines, computes the domain of every agent's sources in the mode's
/// direction, and transforms each agent that owns mappings. Location sets,
/// initial locations, shared variables and channels are unchanged.
MASGraph abstract_mas(const MASGraph& mas, const std::vector<Mapping>& maps, const AbstractionOptions& opts = {},
                      AbstractionReport* report = nullptr);

/// Transforms one agent given the domain of all its mappings' sources
/// (d.vars must cover them). All mappings must belong to `agent`.
AgentGraph transform_agent(const MASGraph& mas, int agent, const std::vector<Mapping>& maps,
                           const NarrowedDomain& d, const AbstractionOptions& opts = {},
                           AbstractionReport* report = nullptr);

/// Plain removal of local variables.
AgentGraph remove_variables(const MASGraph& mas, int agent, const std::vector<std::string>& vars,
                            const NarrowedDomain& d, const AbstractionOptions& opts = {},
                            AbstractionReport* report = nullptr);
/// Global mappings only.
AgentGraph merge_variables(const MASGraph& mas, int agent, const NarrowedDomain& d, const std::vector<Mapping>& maps,
                           const AbstractionOptions& opts = {}, AbstractionReport* report = nullptr);
/// Mappings with scopes (a missing scope means every location).
AgentGraph scoped_abstraction(const MASGraph& mas, int agent, const NarrowedDomain& d,
                              const std::vector<Mapping>& maps, const AbstractionOptions& opts = {},
                              AbstractionReport* report = nullptr);

/// Builds the table of a built-in function over the cells of `sources`:
/// "identity", "sum", "parity", "constant:<k>", "bucket:<k>" (sum / k,
/// rounded down) or "table:<v0>,<v1>,..." (row-major over the cells).
TablePtr builtin_fn(const MASGraph& mas, const std::vector<std::string>& sources, const std::string& spec);

/// Mapping with every default filled in; checks sources, scope, target
/// freshness and that fn is total with values in the target domain.
Mapping resolve_mapping(const MASGraph& mas, Mapping m);

/// Abstraction config: a mode line plus [[mapping]] blocks.
///
///   mode = "may"
///   [[mapping]]
///   agent = "Voter"
///   sources = ["x"]
///   target = "z"          # optional
///   domain = "0..1"       # target domain; default: range of fn
///   fn = "parity"
///   scope = ["voted"]     # optional
///   reset = [0]           # optional
///   outside = 0           # optional
struct AbstractionConfig {
    AbsMode mode = AbsMode::May;
    std::vector<Mapping> mappings;
};
AbstractionConfig parse_abstraction_config(const std::string& text, const MASGraph& mas);
AbstractionConfig load_abstraction_config(const std::string& path, const MASGraph& mas);

/// Variables the abstraction leaves observable: all variables except the
/// sources of the mappings (scoped sources included) and the targets.
std::set<std::string> kept_variables(const MASGraph& concrete, const std::vector<Mapping>& maps);

}  // namespace masabs

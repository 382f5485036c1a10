#pragma once

// MAS-graph data model: variables, agent graphs, the multi-agent system.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "masabs/expr.hpp"

namespace masabs {

/// Raised when a system description violates a structural invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct VarDecl {
    std::string name;  // fully qualified
    int lo = 0;
    int hi = 0;
    int index_lo = 0;  // arrays only
    int length = 0;    // 0 for scalars
    std::vector<int> init;  // one value per cell
    bool shared = false;

    bool is_array() const { return length > 0; }
    int cells() const { return length > 0 ? length : 1; }
    int domain_size() const { return hi - lo + 1; }
};

/// One atomic assignment; lhs is a Var or Index node.
struct Assign {
    ExprPtr lhs;
    ExprPtr rhs;
};
using Update = std::vector<Assign>;

std::set<std::string> vars_of(const Update& u);
std::set<std::string> reads_of(const Update& u);
std::set<std::string> writes_of(const Update& u);
std::string to_string(const Update& u);
std::string to_string_in(const Update& u, const std::string& agent);
Update substitute(const Update& u, const std::vector<Binding>& bindings);

enum class SyncKind { None, Send, Recv };

struct Sync {
    SyncKind kind = SyncKind::None;
    std::string channel;

    bool operator==(const Sync&) const = default;
};

std::string to_string(const Sync& s);

struct Edge {
    int src = 0;
    int dst = 0;
    ExprPtr guard = ex::truth();
    Sync sync;
    Update update;
    int origin = -1;  // index of the concrete edge an abstract edge derives from
};

struct AgentGraph {
    std::string name;
    std::vector<VarDecl> vars;  // locals, fully qualified
    std::vector<std::string> locations;
    int initial = 0;
    std::vector<Edge> edges;

    int location_index(const std::string& loc) const;
};

struct MASGraph {
    std::vector<VarDecl> shared;
    std::vector<std::string> channels;
    std::vector<TablePtr> tables;
    std::vector<AgentGraph> agents;
    ExprPtr g0;  // as written; the unique initial evaluation lives in VarDecl::init

    /// Every variable, sorted by fully-qualified name.
    std::vector<VarDecl> all_vars() const;
    const VarDecl* find_var(const std::string& name) const;
    int agent_index(const std::string& name) const;
    /// Conjunction of v == default over all variables.
    ExprPtr initial_condition() const;
};

/// Checks the invariants of the data model; throws ValidationError.
void validate(const MASGraph& mas);

/// Renders a system in the .masg text format (parse_mas accepts the output).
std::string to_text(const MASGraph& mas);

}  // namespace masabs

#pragma once

// Explicit-state models: serial transition systems with proposition
// labelling, produced by unwrapping a combined graph.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "masabs/composition.hpp"
#include "masabs/eval.hpp"

namespace masabs {

struct UnwrapStats {
    std::size_t states = 0;
    std::size_t transitions = 0;
    std::size_t closure_loops = 0;
    std::size_t bytes = 0;  // approximate resident size of the state store
    double millis = 0;
    bool complete = true;
};

/// Raised when a state budget is exhausted; carries the statistics gathered so far.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& msg, UnwrapStats stats) : std::runtime_error(msg), stats_(stats) {}
    const UnwrapStats& stats() const { return stats_; }

private:
    UnwrapStats stats_;
};

/// A query referred to a proposition the model was not labelled with.
class DefectError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct Model {
    int n = 0;
    std::vector<int> initial;
    std::vector<std::uint32_t> succ_begin;  // size n + 1
    std::vector<std::uint32_t> succ;
    std::vector<std::uint8_t> closure;  // 1 where the self-loop was added for seriality
    std::map<std::string, std::vector<std::uint8_t>> labels;
    std::vector<std::pair<std::string, ExprPtr>> guard_props;  // requested guards by name

    // State payload; empty for models built directly from a transition list.
    Layout layout;
    std::vector<int> loc;   // combined location per state
    std::vector<int> vals;  // n * layout.slot_count()
    std::vector<std::vector<int>> loc_tuples;
    std::vector<std::string> loc_names;

    std::span<const std::uint32_t> successors(int s) const {
        return {succ.data() + succ_begin[static_cast<std::size_t>(s)],
                succ.data() + succ_begin[static_cast<std::size_t>(s) + 1]};
    }
    std::span<const int> valuation(int s) const {
        const auto w = static_cast<std::size_t>(layout.slot_count());
        return {vals.data() + static_cast<std::size_t>(s) * w, w};
    }
    bool has_payload() const { return !loc.empty(); }
    std::size_t transition_count() const { return succ.size(); }
    /// Throws DefectError for an unknown proposition.
    const std::vector<std::uint8_t>& prop(const std::string& name) const;
    /// Location tuple rendered as "<a,b>" plus the valuation.
    std::string describe(int s) const;

    /// Model over states 0..n-1 from an explicit edge list; dead states get
    /// a closure self-loop. Successor lists are sorted and deduplicated.
    static Model build(int n, const std::vector<std::pair<int, int>>& edges, std::vector<int> initial,
                       std::map<std::string, std::vector<std::uint8_t>> labels = {});
};

struct UnwrapOptions {
    std::size_t max_states = 50'000'000;
};

/// Explores the states reachable from the initial states; ids are assigned
/// in breadth-first order with successors sorted by (location, valuation).
/// Every agent location "Agent.loc" is labelled, plus the requested guards
/// under the names given by to_string.
Model unwrap(const CombinedGraph& g, const std::vector<ExprPtr>& requested_guards = {},
             const UnwrapOptions& opts = {}, UnwrapStats* stats = nullptr);

/// States reachable from the initial states.
std::vector<std::uint8_t> reachable(const Model& m);

/// Location propositions plus the requested guards whose variables lie in `keep`.
std::vector<std::string> project_ap(const Model& m, const std::set<std::string>& keep);

/// Versioned JSON rendering of states, transitions and labels.
std::string model_to_json(const Model& m);

}  // namespace masabs

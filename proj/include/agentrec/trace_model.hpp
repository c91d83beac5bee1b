#pragma once
// Structural validation and instance extraction over calling trees.

#include <string>
#include <unordered_map>
#include <vector>

#include "agentrec/types.hpp"

namespace agentrec {

// Returns one description per violated invariant; empty means valid.
// Violations name the offending node_id and rule.
std::vector<std::string> validate_tree(const CallingTree& tree);

// Aggregates (parent.agent_id, child.agent_id) pairs over all trees.
// Throws std::runtime_error naming the id when a node references an
// agent absent from the pool.
AgentNetwork build_agent_network(const std::vector<CallingTree>& trees,
                                 const std::vector<AgentRecord>& pool);

// One instance per non-root node. query = task_text, or the deterministic
// positional fallback when empty: session_query + " | step <depth>: after
// <parent agent name>". context_node_count = ancestor count (root included,
// node itself excluded).
std::vector<DecisionInstance> extract_agent_instances(
    const std::vector<CallingTree>& trees,
    const std::vector<AgentRecord>& pool);

struct SystemExtraction {
    std::vector<DecisionInstance> instances;
    std::uint64_t skipped = 0;  // sessions with empty session_query
};

// One instance per session with a non-empty session_query.
SystemExtraction extract_system_instances(const std::vector<CallingTree>& trees);

// Tree helpers shared by extraction and features.
std::unordered_map<std::string, const CallNode*> node_index(const CallingTree& tree);
std::uint64_t node_depth(const CallingTree& tree, const CallNode& node);  // edges from root

}  // namespace agentrec

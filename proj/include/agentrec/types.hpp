#pragma once
// Core domain types: agents, calling trees, agent networks, decision
// instances. All types are plain values, immutable by convention after
// construction; operations over them live in trace_model.hpp.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agentrec {

enum class CallStatus { success, failure, unknown };

std::string to_string(CallStatus s);
CallStatus status_from_string(const std::string& s);

// One agent/tool in the marketplace pool, with raw usage counts.
// Reliability smoothing happens in features, not here.
struct AgentRecord {
    std::string id;
    std::string name;
    std::string description;
    std::vector<std::string> tags;
    std::string category;
    std::uint64_t invocation_count = 0;
    std::uint64_t success_count = 0;  // <= invocation_count

    // name + description + tags, the text the encoder sees
    std::string profile_text() const;
};

// A single invocation inside a session tree.
struct CallNode {
    std::string node_id;   // unique within the tree
    std::string agent_id;
    std::string task_text; // node-level subtask description, may be empty
    double timestamp = 0;  // seconds; event_index when the log had none
    CallStatus status = CallStatus::unknown;
    std::optional<double> latency_ms;
    std::optional<std::uint64_t> token_count;
    std::optional<std::string> parent;  // absent only for the root
};

// Rooted invocation tree for one session.
struct CallingTree {
    std::string session_id;
    std::string session_query;
    std::vector<CallNode> nodes;

    const CallNode* find(const std::string& node_id) const;
    const CallNode* root() const;  // nullptr if zero or several roots
};

// Global caller->callee graph aggregated over a corpus.
struct AgentNetwork {
    std::vector<AgentRecord> agents;
    // (caller agent_id, callee agent_id) -> observation count
    std::map<std::pair<std::string, std::string>, std::uint64_t> edges;

    std::uint64_t edge_total() const;
};

enum class InstanceKind { agent, system };

std::string to_string(InstanceKind k);

// One training/eval example: a query plus the recorded selection.
struct DecisionInstance {
    std::string instance_id;
    std::string query;
    InstanceKind kind = InstanceKind::agent;
    std::string gold_id;  // agent_id (agent kind) or session_id (system kind)
    std::uint64_t context_node_count = 0;  // |V_t| at decision time
    double label = 1.0;
};

// A historical graph offered as a system-level candidate.
struct SystemCandidate {
    std::string session_id;
    const CallingTree* graph = nullptr;
    std::string serialized;  // cached encoder serialization
};

// A whole normalized corpus: trees plus the agent pool.
struct Corpus {
    std::vector<CallingTree> trees;
    std::vector<AgentRecord> agents;
};

}  // namespace agentrec

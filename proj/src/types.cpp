#include "agentrec/types.hpp"

namespace agentrec {

std::string to_string(CallStatus s) {
    switch (s) {
        case CallStatus::success: return "success";
        case CallStatus::failure: return "failure";
        default: return "unknown";
    }
}

CallStatus status_from_string(const std::string& s) {
    if (s == "success") return CallStatus::success;
    if (s == "failure") return CallStatus::failure;
    return CallStatus::unknown;
}

std::string to_string(InstanceKind k) {
    return k == InstanceKind::agent ? "agent" : "system";
}

std::string AgentRecord::profile_text() const {
    std::string text = name;
    text += ' ';
    text += description;
    for (const auto& tag : tags) {
        text += ' ';
        text += tag;
    }
    return text;
}

const CallNode* CallingTree::find(const std::string& node_id) const {
    for (const auto& n : nodes) {
        if (n.node_id == node_id) return &n;
    }
    return nullptr;
}

const CallNode* CallingTree::root() const {
    const CallNode* root = nullptr;
    for (const auto& n : nodes) {
        if (!n.parent) {
            if (root) return nullptr;  // several roots: invalid
            root = &n;
        }
    }
    return root;
}

std::uint64_t AgentNetwork::edge_total() const {
    std::uint64_t total = 0;
    for (const auto& [edge, count] : edges) total += count;
    return total;
}

}  // namespace agentrec

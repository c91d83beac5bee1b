#include "agentrec/trace_model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace agentrec {

std::unordered_map<std::string, const CallNode*> node_index(const CallingTree& tree) {
    std::unordered_map<std::string, const CallNode*> index;
    index.reserve(tree.nodes.size());
    for (const auto& node : tree.nodes) index[node.node_id] = &node;
    return index;
}

std::uint64_t node_depth(const CallingTree& tree, const CallNode& node) {
    auto index = node_index(tree);
    std::uint64_t depth = 0;
    const CallNode* current = &node;
    while (current->parent) {
        auto it = index.find(*current->parent);
        if (it == index.end() || depth > tree.nodes.size()) break;  // corrupt tree
        current = it->second;
        ++depth;
    }
    return depth;
}

std::vector<std::string> validate_tree(const CallingTree& tree) {
    std::vector<std::string> violations;
    if (tree.nodes.empty()) {
        violations.push_back("empty tree: no nodes");
        return violations;
    }

    std::unordered_map<std::string, const CallNode*> index;
    for (const auto& node : tree.nodes) {
        if (!index.emplace(node.node_id, &node).second) {
            violations.push_back("duplicate node_id: " + node.node_id);
        }
    }

    std::vector<const CallNode*> roots;
    for (const auto& node : tree.nodes) {
        if (!node.parent) {
            roots.push_back(&node);
            continue;
        }
        auto it = index.find(*node.parent);
        if (it == index.end()) {
            violations.push_back("dangling parent: " + node.node_id);
            continue;
        }
        if (it->second->timestamp > node.timestamp) {
            violations.push_back("timestamp order violated at: " + node.node_id);
        }
    }
    if (roots.empty()) {
        violations.push_back("no root");
    } else if (roots.size() > 1) {
        std::string ids;
        for (const auto* r : roots) ids += " " + r->node_id;
        violations.push_back("multiple roots:" + ids);
    }

    // Reachability by parent chain; a chain longer than the node count
    // means a cycle.
    for (const auto& node : tree.nodes) {
        const CallNode* current = &node;
        std::size_t steps = 0;
        while (current->parent && steps <= tree.nodes.size()) {
            auto it = index.find(*current->parent);
            if (it == index.end()) break;  // already reported as dangling
            current = it->second;
            ++steps;
        }
        if (steps > tree.nodes.size()) {
            violations.push_back("cycle through: " + node.node_id);
        }
    }
    return violations;
}

AgentNetwork build_agent_network(const std::vector<CallingTree>& trees,
                                 const std::vector<AgentRecord>& pool) {
    std::unordered_set<std::string> known;
    known.reserve(pool.size());
    for (const auto& agent : pool) known.insert(agent.id);

    AgentNetwork network;
    network.agents = pool;
    for (const auto& tree : trees) {
        auto index = node_index(tree);
        for (const auto& node : tree.nodes) {
            if (!known.count(node.agent_id)) {
                throw std::runtime_error("unknown agent_id in tree " +
                                         tree.session_id + ": " + node.agent_id);
            }
            if (!node.parent) continue;
            auto it = index.find(*node.parent);
            if (it == index.end()) continue;
            ++network.edges[{it->second->agent_id, node.agent_id}];
        }
    }
    return network;
}

std::vector<DecisionInstance> extract_agent_instances(
    const std::vector<CallingTree>& trees,
    const std::vector<AgentRecord>& pool) {
    std::unordered_map<std::string, const AgentRecord*> agents;
    for (const auto& agent : pool) agents[agent.id] = &agent;

    std::vector<DecisionInstance> instances;
    for (const auto& tree : trees) {
        auto index = node_index(tree);
        for (const auto& node : tree.nodes) {
            if (!node.parent) continue;

            DecisionInstance inst;
            inst.instance_id = tree.session_id + "#" + node.node_id;
            inst.kind = InstanceKind::agent;
            inst.gold_id = node.agent_id;
            inst.context_node_count = node_depth(tree, node);
            inst.label = 1.0;

            if (!node.task_text.empty()) {
                inst.query = node.task_text;
            } else {
                const std::uint64_t depth = inst.context_node_count;
                auto parent_it = index.find(*node.parent);
                std::string parent_name = *node.parent;
                if (parent_it != index.end()) {
                    auto agent_it = agents.find(parent_it->second->agent_id);
                    parent_name = agent_it != agents.end() ? agent_it->second->name
                                                           : parent_it->second->agent_id;
                }
                inst.query = tree.session_query + " | step " + std::to_string(depth) +
                             ": after " + parent_name;
            }
            instances.push_back(std::move(inst));
        }
    }
    return instances;
}

SystemExtraction extract_system_instances(const std::vector<CallingTree>& trees) {
    SystemExtraction out;
    for (const auto& tree : trees) {
        if (tree.session_query.empty()) {
            ++out.skipped;
            continue;
        }
        DecisionInstance inst;
        inst.instance_id = tree.session_id + "#session";
        inst.query = tree.session_query;
        inst.kind = InstanceKind::system;
        inst.gold_id = tree.session_id;
        inst.context_node_count = 0;
        inst.label = 1.0;
        out.instances.push_back(std::move(inst));
    }
    return out;
}

}  // namespace agentrec

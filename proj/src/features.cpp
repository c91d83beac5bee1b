#include "agentrec/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "agentrec/trace_model.hpp"

namespace agentrec {

std::array<double, 5> GraphStats::coop_vector() const {
    return {static_cast<double>(node_count), static_cast<double>(edge_count),
            static_cast<double>(depth), branch, static_cast<double>(tool_uniq)};
}

std::array<double, 6> GraphStats::struct_vector() const {
    return {static_cast<double>(node_count), static_cast<double>(edge_count),
            static_cast<double>(depth),      branch,
            static_cast<double>(tool_uniq),  density};
}

GraphStats graph_stats(const CallingTree& tree) {
    GraphStats s;
    s.node_count = tree.nodes.size();
    if (tree.nodes.empty()) return s;

    std::set<std::string> agents;
    std::set<std::string> parents;  // node ids that appear as a parent
    for (const CallNode& n : tree.nodes) {
        agents.insert(n.agent_id);
        if (n.parent) {
            ++s.edge_count;
            parents.insert(*n.parent);
        }
    }
    s.tool_uniq = agents.size();

    for (const CallNode& n : tree.nodes)
        s.depth = std::max(s.depth, node_depth(tree, n));

    const std::uint64_t non_leaf = parents.size();
    s.branch = non_leaf ? static_cast<double>(s.edge_count) /
                              static_cast<double>(non_leaf)
                        : 0.0;
    const double v = static_cast<double>(s.node_count);
    s.density = s.node_count > 1
                    ? 2.0 * static_cast<double>(s.edge_count) / (v * (v - 1.0))
                    : 0.0;
    return s;
}

std::array<double, 5> NormalizationStats::z5(const GraphStats& s) const {
    const auto raw = s.coop_vector();
    std::array<double, 5> out{};
    for (std::size_t i = 0; i < 5; ++i) {
        const double sd = stddev[i] > 0 ? stddev[i] : 1.0;
        out[i] = (raw[i] - mean[i]) / sd;
    }
    return out;
}

std::array<double, 6> NormalizationStats::z6(const GraphStats& s) const {
    const auto raw = s.struct_vector();
    std::array<double, 6> out{};
    for (std::size_t i = 0; i < 6; ++i) {
        const double sd = stddev[i] > 0 ? stddev[i] : 1.0;
        out[i] = (raw[i] - mean[i]) / sd;
    }
    return out;
}

double NormalizationStats::z_agent_pop(std::uint64_t invocation_count) const {
    const double raw = std::log1p(static_cast<double>(invocation_count));
    const double sd = agent_pop_std > 0 ? agent_pop_std : 1.0;
    return (raw - agent_pop_mean) / sd;
}

NormalizationStats fit_normalizer(
    const std::vector<CallingTree>& training_graphs) {
    if (training_graphs.empty())
        throw std::invalid_argument("fit_normalizer: no training graphs");
    NormalizationStats out;
    const double n = static_cast<double>(training_graphs.size());
    std::vector<std::array<double, 6>> rows;
    rows.reserve(training_graphs.size());
    for (const CallingTree& t : training_graphs)
        rows.push_back(graph_stats(t).struct_vector());
    for (std::size_t i = 0; i < 6; ++i) {
        double sum = 0;
        for (const auto& r : rows) sum += r[i];
        out.mean[i] = sum / n;
        double ss = 0;
        for (const auto& r : rows) {
            const double d = r[i] - out.mean[i];
            ss += d * d;
        }
        out.stddev[i] = std::sqrt(ss / n);  // population std
    }
    out.graph_fitted = true;
    return out;
}

void fit_agent_popularity(NormalizationStats& stats,
                          const std::vector<AgentRecord>& pool) {
    if (pool.empty())
        throw std::invalid_argument("fit_agent_popularity: empty agent pool");
    const double n = static_cast<double>(pool.size());
    double sum = 0;
    for (const AgentRecord& a : pool)
        sum += std::log1p(static_cast<double>(a.invocation_count));
    stats.agent_pop_mean = sum / n;
    double ss = 0;
    for (const AgentRecord& a : pool) {
        const double d =
            std::log1p(static_cast<double>(a.invocation_count)) -
            stats.agent_pop_mean;
        ss += d * d;
    }
    stats.agent_pop_std = std::sqrt(ss / n);
    stats.agent_fitted = true;
}

double phi_rel_agent(const Encoder& enc, const std::string& query,
                     const AgentRecord& agent) {
    // Non-negative term vectors keep cosine in [0,1]; clamp the rounding ulp.
    return std::min(1.0, cosine(enc.encode_text(query), enc.encode_agent(agent)));
}

double phi_rel_graph(const Encoder& enc, const std::string& query,
                     const std::string& session_id,
                     const std::string& serialized) {
    return std::min(1.0, cosine(enc.encode_text(query),
                                enc.encode_serialized(session_id, serialized)));
}

double phi_hist_agent(const AgentRecord& agent) {
    return (static_cast<double>(agent.success_count) + 1.0) /
           (static_cast<double>(agent.invocation_count) + 2.0);
}

double phi_hist_graph(
    const CallingTree& tree,
    const std::unordered_map<std::string, const AgentRecord*>& agents_by_id) {
    if (tree.nodes.empty()) return 0.5;  // smoothed prior of an empty record
    double sum = 0;
    for (const CallNode& n : tree.nodes) {
        auto it = agents_by_id.find(n.agent_id);
        if (it != agents_by_id.end() && it->second) {
            sum += phi_hist_agent(*it->second);
        } else {
            sum += 0.5;  // unknown agent: uninformative smoothed rate
        }
    }
    return sum / static_cast<double>(tree.nodes.size());
}

double phi_coop_agent(const Encoder& enc, const std::string& query,
                      const AgentRecord& agent) {
    std::string agent_text = agent.name;
    for (const std::string& t : agent.tags) {
        agent_text += ' ';
        agent_text += t;
    }
    const auto q_tokens = tokenize(query);
    const auto a_tokens = tokenize(agent_text);
    const std::set<std::string> qs(q_tokens.begin(), q_tokens.end());
    const std::set<std::string> as(a_tokens.begin(), a_tokens.end());
    std::uint64_t inter = 0;
    for (const auto& t : qs) inter += as.count(t);
    const std::uint64_t uni = qs.size() + as.size() - inter;
    const double jaccard =
        uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
    const double cos = cosine(enc.encode_text(query), enc.encode_text(agent_text));
    return 0.5 * jaccard + 0.5 * cos;
}

double phi_coop_graph(const GraphStats& stats,
                      const std::array<double, 5>& w_coop,
                      const NormalizationStats& norm) {
    if (!norm.graph_fitted)
        throw std::logic_error("phi_coop_graph: normalizer not fitted");
    const auto z = norm.z5(stats);
    double dot = 0;
    for (std::size_t i = 0; i < 5; ++i) dot += w_coop[i] * z[i];
    return dot;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double phi_struct_graph(const GraphStats& stats,
                        const std::array<double, 6>& w_struct,
                        const NormalizationStats& norm) {
    if (!norm.graph_fitted)
        throw std::logic_error("phi_struct_graph: normalizer not fitted");
    const auto z = norm.z6(stats);
    double dot = 0;
    for (std::size_t i = 0; i < 6; ++i) dot += w_struct[i] * z[i];
    return logistic(dot);
}

double phi_struct_agent(const AgentRecord& agent,
                        const std::array<double, 6>& w_struct,
                        const NormalizationStats& norm) {
    if (!norm.agent_fitted)
        throw std::logic_error("phi_struct_agent: popularity stats not fitted");
    return logistic(w_struct[0] * norm.z_agent_pop(agent.invocation_count));
}

}  // namespace agentrec

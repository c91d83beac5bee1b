#pragma once
// The four feature families behind the linear scorer: semantic relevance,
// smoothed reliability, cooperation/compatibility, and structural utility,
// plus graph statistics and their z-score normalization.

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "agentrec/encoder.hpp"
#include "agentrec/types.hpp"

namespace agentrec {

struct GraphStats {
    std::uint64_t node_count = 0;
    std::uint64_t edge_count = 0;   // node_count - 1 on trees
    std::uint64_t depth = 0;        // max edges from root
    double branch = 0;              // edges / non-leaf nodes, 0 if all leaves
    std::uint64_t tool_uniq = 0;    // distinct agent ids
    double density = 0;             // 2|E|/(|V|(|V|-1)), 0 for |V| = 1

    std::array<double, 5> coop_vector() const;    // [|V|,|E|,depth,branch,uniq]
    std::array<double, 6> struct_vector() const;  // coop_vector + density
};

GraphStats graph_stats(const CallingTree& tree);

struct FeatureVector {
    double rel = 0;
    double hist = 0;
    double coop = 0;
    double struct_ = 0;

    std::array<double, 4> as_array() const { return {rel, hist, coop, struct_}; }
};

// Per-statistic mean/std fitted on the training split; population std,
// zero std replaced by 1 at application time. The agent entry normalizes
// log(1+invocation_count), the popularity proxy behind agent phi_struct.
struct NormalizationStats {
    std::array<double, 6> mean{};  // [|V|,|E|,depth,branch,uniq,density]
    std::array<double, 6> stddev{};
    double agent_pop_mean = 0;
    double agent_pop_std = 0;
    bool graph_fitted = false;
    bool agent_fitted = false;

    std::array<double, 5> z5(const GraphStats& s) const;
    std::array<double, 6> z6(const GraphStats& s) const;
    double z_agent_pop(std::uint64_t invocation_count) const;
};

// Graph side: mean/std of the 6 statistics over the training graphs.
// Throws on empty input.
NormalizationStats fit_normalizer(const std::vector<CallingTree>& training_graphs);

// Agent side: mean/std of log(1+invocation_count) over the pool; merged
// into an existing NormalizationStats so one object serves both kinds.
void fit_agent_popularity(NormalizationStats& stats,
                          const std::vector<AgentRecord>& pool);

double phi_rel_agent(const Encoder& enc, const std::string& query,
                     const AgentRecord& agent);
double phi_rel_graph(const Encoder& enc, const std::string& query,
                     const std::string& session_id, const std::string& serialized);

// Laplace-smoothed success rate (s+1)/(n+2); strictly inside (0,1).
double phi_hist_agent(const AgentRecord& agent);
// Mean of node-level smoothed rates of the constituent agents.
double phi_hist_graph(const CallingTree& tree,
                      const std::unordered_map<std::string, const AgentRecord*>& agents_by_id);

// 0.5 * Jaccard(query tokens, name+tags tokens) + 0.5 * cosine of the same
// texts under the built-in tokenizer. The agent network carries no weight
// here; compatibility is lexical in the agent case.
double phi_coop_agent(const Encoder& enc, const std::string& query,
                      const AgentRecord& agent);
// w_coop . z([|V|,|E|,depth,branch,tool_uniq]); throws if unfitted.
double phi_coop_graph(const GraphStats& stats, const std::array<double, 5>& w_coop,
                      const NormalizationStats& norm);

double logistic(double x);

// sigma(w_struct . z6) for graphs; sigma(w_struct[0] * z(log1p(count)))
// for agents.
double phi_struct_graph(const GraphStats& stats, const std::array<double, 6>& w_struct,
                        const NormalizationStats& norm);
double phi_struct_agent(const AgentRecord& agent, const std::array<double, 6>& w_struct,
                        const NormalizationStats& norm);

}  // namespace agentrec

#pragma once
// Train/test splitting, ranking metrics, and the closed-form token-cost
// model for direct vs two-stage selection at one decision node.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentrec/pipeline.hpp"

namespace agentrec {

struct SplitResult {
    std::vector<DecisionInstance> train;
    std::vector<DecisionInstance> test;
};

// Deterministic split by hashed instance_id + seed; disjoint, exhaustive.
// Throws when the fraction is outside (0,1) or fewer than 2 instances.
SplitResult split_dataset(const std::vector<DecisionInstance>& instances,
                          double train_fraction, std::uint64_t seed);

// Fraction of instances whose gold appears in the stage-1 top-K.
double retrieval_success_rate(const CorpusIndex& index,
                              const std::vector<DecisionInstance>& instances,
                              std::uint64_t k);

// For each k in k_eval: fraction of instances whose gold lands within the
// first k of the reranked top-K_retrieve list. Throws on an empty set.
std::map<std::uint64_t, double> top_k_accuracy(
    const Model& model, const CorpusIndex& index,
    const std::vector<DecisionInstance>& instances, std::uint64_t k_retrieve,
    const std::vector<std::uint64_t>& k_eval);

// Slates for training: stage-1 top-K per instance, gold force-included
// (appended) when retrieval misses it. Instances whose gold is absent
// from the corpus are dropped with a count.
struct SlateBuild {
    std::vector<Slate> slates;
    std::uint64_t gold_forced = 0;
    std::uint64_t dropped = 0;
};
SlateBuild build_training_slates(const CorpusIndex& index,
                                 const std::vector<DecisionInstance>& instances,
                                 std::uint64_t k);

enum class TokenCostVariant { ctx, item, direct, two_stage, direct_graph, two_stage_graph };

TokenCostVariant token_cost_variant_from_string(const std::string& s);

// Closed-form prompt-token counts at a single decision node. Integer mode
// is exact u64 arithmetic; expected mode accepts real-valued averages.
struct TokenCostParams {
    std::optional<std::uint64_t> pool_size;            // N
    std::optional<std::uint64_t> shortlist;            // K
    std::optional<std::uint64_t> graph_pool_size;      // M
    std::optional<std::uint64_t> graph_shortlist;      // K_g
    std::optional<std::uint64_t> item_tokens;          // L
    std::optional<double> avg_subgraph_nodes;          // s
    std::optional<std::uint64_t> subgraph_node_tokens; // L_s
    std::optional<std::uint64_t> context_nodes;        // |V_t|
    std::optional<std::uint64_t> context_node_tokens;  // L_g
};

struct TokenCostParamsReal {
    std::optional<double> pool_size, shortlist, graph_pool_size, graph_shortlist,
        item_tokens, avg_subgraph_nodes, subgraph_node_tokens, context_nodes,
        context_node_tokens;
};

// ctx: |V_t|*L_g            item: L + |V_t|*L_g
// direct: N*(L + |V_t|*L_g)             two_stage: (N+K)*(L + |V_t|*L_g)
// direct_graph: M*(s*L_s + |V_t|*L_g)   two_stage_graph: (M+K_g)*(s*L_s + |V_t|*L_g)
// Missing parameters (or K > N, K_g > M) throw naming the parameter.
std::uint64_t token_cost(const TokenCostParams& params, TokenCostVariant variant);
double token_cost_expected(const TokenCostParamsReal& params, TokenCostVariant variant);

struct PerQueryRecord {
    std::string instance_id;
    std::string gold_id;
    std::string chosen;
    std::int64_t gold_rank = -1;  // 0-based rank in reranked list, -1 = missed
    bool retrieved = false;       // gold in stage-1 top-K
};

struct EvalConfig {
    std::string dataset_id;
    std::uint64_t k_retrieve = 20;
    std::vector<std::uint64_t> k_eval{1, 5};
    bool lower_is_better = false;
    std::uint64_t seed = 42;
    bool deterministic = false;  // suppress timestamped report fields
};

struct EvalReport {
    std::string dataset_id;
    InstanceKind kind = InstanceKind::agent;
    std::uint64_t k_retrieve = 0;
    double top_1 = 0;
    std::map<std::uint64_t, double> top_k;
    double retrieval_sr = 0;
    bool lower_is_better = false;
    std::uint64_t instance_count = 0;
    std::vector<PerQueryRecord> per_query;
    std::string config_digest;
};

// Metrics over the given (test) instances; top_1 <= retrieval_sr holds by
// construction since evaluation never force-includes the gold.
EvalReport evaluate(const Model& model, const CorpusIndex& index,
                    const std::vector<DecisionInstance>& instances,
                    const EvalConfig& config);

std::string report_to_json(const EvalReport& report, bool deterministic);
std::string report_to_csv(const EvalReport& report);  // metric,dataset,variant,value

}  // namespace agentrec

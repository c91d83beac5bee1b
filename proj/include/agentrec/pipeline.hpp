#pragma once
// Two-stage decision procedure: stage 1 retrieves the feasible candidate
// set by embedding similarity, stage 2 reranks it with the trained scorer.
// Direct mode scores the whole pool without retrieval truncation.

#include <string>
#include <vector>

#include "agentrec/corpus.hpp"
#include "agentrec/ranker.hpp"

namespace agentrec {

struct ScoredCandidate {
    std::string id;
    double stage1_similarity = 0;
    double stage2_score = 0;
};

enum class RecommendMode { direct, two_stage };

std::string to_string(RecommendMode m);

struct Recommendation {
    std::string query;
    std::vector<ScoredCandidate> candidates;  // in final rank order
    std::string chosen;
    std::uint64_t k_used = 0;
    RecommendMode mode = RecommendMode::two_stage;
};

// Top-K by cosine against agent profiles, descending, ties by id.
// K past the pool size returns the whole pool.
std::vector<std::pair<std::string, double>> retrieve_agents(
    const CorpusIndex& index, const std::string& query, std::uint64_t k);

// Top-K by cosine against serialized graphs.
std::vector<std::pair<std::string, double>> retrieve_systems(
    const CorpusIndex& index, const std::string& query, std::uint64_t k);

std::vector<std::pair<std::string, double>> retrieve(
    const CorpusIndex& index, InstanceKind kind, const std::string& query,
    std::uint64_t k);

// Reorders stage-1 output by scorer, preserving stage-1 similarities for
// diagnostics. Throws on an empty feasible set.
Recommendation rerank(const Model& model, const CorpusIndex& index,
                      const std::string& query,
                      const std::vector<std::pair<std::string, double>>& stage1);

// direct: exhaustive scoring of the full pool; two_stage: retrieve + rerank.
Recommendation recommend(const Model& model, const CorpusIndex& index,
                         const std::string& query, RecommendMode mode,
                         std::uint64_t k);

}  // namespace agentrec

#include "agentrec/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

namespace agentrec {

std::string to_string(RecommendMode m) {
    return m == RecommendMode::direct ? "direct" : "two_stage";
}

namespace {

// Descending similarity, ties by ascending id; truncated to k.
std::vector<std::pair<std::string, double>> top_k(
    std::vector<std::pair<std::string, double>> scored, std::uint64_t k) {
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });
    if (scored.size() > k) scored.resize(static_cast<std::size_t>(k));
    return scored;
}

}  // namespace

std::vector<std::pair<std::string, double>> retrieve_agents(
    const CorpusIndex& index, const std::string& query, std::uint64_t k) {
    const EmbeddingVector qv = index.encoder().encode_text(query);
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(index.agents().size());
    for (const AgentRecord* a : index.agents())
        scored.emplace_back(a->id, cosine(qv, index.agent_embedding(a->id)));
    return top_k(std::move(scored), k);
}

std::vector<std::pair<std::string, double>> retrieve_systems(
    const CorpusIndex& index, const std::string& query, std::uint64_t k) {
    const EmbeddingVector qv = index.encoder().encode_text(query);
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(index.systems().size());
    for (const SystemCandidate& s : index.systems())
        scored.emplace_back(s.session_id,
                            cosine(qv, index.system_embedding(s.session_id)));
    return top_k(std::move(scored), k);
}

std::vector<std::pair<std::string, double>> retrieve(
    const CorpusIndex& index, InstanceKind kind, const std::string& query,
    std::uint64_t k) {
    return kind == InstanceKind::agent ? retrieve_agents(index, query, k)
                                       : retrieve_systems(index, query, k);
}

Recommendation rerank(const Model& model, const CorpusIndex& index,
                      const std::string& query,
                      const std::vector<std::pair<std::string, double>>& stage1) {
    if (stage1.empty())
        throw std::invalid_argument("rerank: empty feasible set for query: " +
                                    query);
    Recommendation rec;
    rec.query = query;
    rec.mode = RecommendMode::two_stage;
    rec.k_used = stage1.size();
    rec.candidates.reserve(stage1.size());
    for (const auto& [id, sim] : stage1) {
        ScoredCandidate sc;
        sc.id = id;
        sc.stage1_similarity = sim;
        sc.stage2_score = score(model, index, query, id);
        rec.candidates.push_back(std::move(sc));
    }
    std::sort(rec.candidates.begin(), rec.candidates.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                  if (a.stage2_score != b.stage2_score)
                      return a.stage2_score > b.stage2_score;
                  return a.id < b.id;
              });
    rec.chosen = rec.candidates.front().id;
    return rec;
}

Recommendation recommend(const Model& model, const CorpusIndex& index,
                         const std::string& query, RecommendMode mode,
                         std::uint64_t k) {
    if (mode == RecommendMode::two_stage) {
        Recommendation rec =
            rerank(model, index, query, retrieve(index, model.kind, query, k));
        rec.k_used = k;
        return rec;
    }

    // Direct: exhaustive scoring of the whole pool, no retrieval stage.
    Recommendation rec;
    rec.query = query;
    rec.mode = RecommendMode::direct;
    rec.k_used = 0;
    if (model.kind == InstanceKind::agent) {
        rec.candidates.reserve(index.agents().size());
        for (const AgentRecord* a : index.agents()) {
            ScoredCandidate sc;
            sc.id = a->id;
            sc.stage2_score = score(model, index, query, a->id);
            rec.candidates.push_back(std::move(sc));
        }
    } else {
        rec.candidates.reserve(index.systems().size());
        for (const SystemCandidate& s : index.systems()) {
            ScoredCandidate sc;
            sc.id = s.session_id;
            sc.stage2_score = score(model, index, query, s.session_id);
            rec.candidates.push_back(std::move(sc));
        }
    }
    if (rec.candidates.empty())
        throw std::invalid_argument("recommend: empty candidate pool");
    std::sort(rec.candidates.begin(), rec.candidates.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                  if (a.stage2_score != b.stage2_score)
                      return a.stage2_score > b.stage2_score;
                  return a.id < b.id;
              });
    rec.chosen = rec.candidates.front().id;
    return rec;
}

}  // namespace agentrec

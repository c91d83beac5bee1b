#pragma once
// Read-only view over a loaded corpus: id lookups, the aggregated agent
// network, system candidates with cached serializations, and precomputed
// embeddings. Built once, then shared by retrieval, features and eval.

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "agentrec/encoder.hpp"
#include "agentrec/types.hpp"

namespace agentrec {

class CorpusIndex {
public:
    // Agents and systems are indexed in sorted-id order so every scan is
    // deterministic. The encoder is copied in (sidecar already loaded).
    CorpusIndex(const Corpus& corpus, Encoder encoder);

    const Corpus& corpus() const { return *corpus_; }
    const Encoder& encoder() const { return encoder_; }
    const AgentNetwork& network() const { return network_; }

    const std::vector<const AgentRecord*>& agents() const { return agents_; }
    const std::vector<SystemCandidate>& systems() const { return systems_; }
    const std::unordered_map<std::string, const AgentRecord*>& agents_by_id() const {
        return agent_index_;
    }

    const AgentRecord* agent(const std::string& id) const;
    const SystemCandidate* system(const std::string& session_id) const;

    const EmbeddingVector& agent_embedding(const std::string& id) const;
    const EmbeddingVector& system_embedding(const std::string& session_id) const;

private:
    const Corpus* corpus_;
    Encoder encoder_;
    AgentNetwork network_;
    std::vector<const AgentRecord*> agents_;           // sorted by id
    std::vector<SystemCandidate> systems_;             // sorted by session_id
    std::unordered_map<std::string, const AgentRecord*> agent_index_;
    std::unordered_map<std::string, std::size_t> system_index_;
    std::unordered_map<std::string, EmbeddingVector> agent_vecs_;
    std::unordered_map<std::string, EmbeddingVector> system_vecs_;
};

}  // namespace agentrec

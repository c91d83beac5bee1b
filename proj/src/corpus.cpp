#include "agentrec/corpus.hpp"

#include <algorithm>
#include <stdexcept>

#include "agentrec/trace_model.hpp"

namespace agentrec {

CorpusIndex::CorpusIndex(const Corpus& corpus, Encoder encoder)
    : corpus_(&corpus), encoder_(std::move(encoder)) {
    agents_.reserve(corpus.agents.size());
    for (const AgentRecord& a : corpus.agents) agents_.push_back(&a);
    std::sort(agents_.begin(), agents_.end(),
              [](const AgentRecord* a, const AgentRecord* b) {
                  return a->id < b->id;
              });
    for (const AgentRecord* a : agents_) {
        agent_index_[a->id] = a;
        agent_vecs_[a->id] = encoder_.encode_agent(*a);
    }

    network_ = build_agent_network(corpus.trees, corpus.agents);

    systems_.reserve(corpus.trees.size());
    for (const CallingTree& t : corpus.trees) {
        SystemCandidate sc;
        sc.session_id = t.session_id;
        sc.graph = &t;
        sc.serialized = serialize_graph(t, agent_index_);
        systems_.push_back(std::move(sc));
    }
    std::sort(systems_.begin(), systems_.end(),
              [](const SystemCandidate& a, const SystemCandidate& b) {
                  return a.session_id < b.session_id;
              });
    for (std::size_t i = 0; i < systems_.size(); ++i) {
        system_index_[systems_[i].session_id] = i;
        system_vecs_[systems_[i].session_id] =
            encoder_.encode_serialized(systems_[i].session_id,
                                       systems_[i].serialized);
    }
}

const AgentRecord* CorpusIndex::agent(const std::string& id) const {
    auto it = agent_index_.find(id);
    return it == agent_index_.end() ? nullptr : it->second;
}

const SystemCandidate* CorpusIndex::system(const std::string& session_id) const {
    auto it = system_index_.find(session_id);
    return it == system_index_.end() ? nullptr : &systems_[it->second];
}

const EmbeddingVector& CorpusIndex::agent_embedding(const std::string& id) const {
    auto it = agent_vecs_.find(id);
    if (it == agent_vecs_.end())
        throw std::out_of_range("unknown agent id: " + id);
    return it->second;
}

const EmbeddingVector& CorpusIndex::system_embedding(
    const std::string& session_id) const {
    auto it = system_vecs_.find(session_id);
    if (it == system_vecs_.end())
        throw std::out_of_range("unknown session id: " + session_id);
    return it->second;
}

}  // namespace agentrec

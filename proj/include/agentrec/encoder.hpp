#pragma once
// Deterministic text/graph embedding. The built-in encoder is token-hashing
// term frequency with L2 normalization: lowercase, split on non-alphanumeric
// ASCII, FNV-1a 64-bit per token reduced mod d (default 256). Precomputed
// external embeddings can override agents (by id) and graphs (by session_id)
// through a JSONL sidecar.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "agentrec/types.hpp"

namespace agentrec {

using EmbeddingVector = std::vector<double>;

constexpr std::size_t kDefaultEmbeddingDim = 256;

// FNV-1a 64-bit; the fixed token hash of the built-in encoder.
std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed);

std::vector<std::string> tokenize(const std::string& text);

// dot(u,v)/(|u||v|); 0 when either norm is 0. Throws on dimension mismatch.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

// Depth-first preorder serialization, children in (timestamp, node_id)
// order. node := name " (" description ")", ")" in descriptions escaped
// as "\)"; edge marker " CALLER->CALLEE " between parent and child
// segments. Nodes with no pool entry fall back to the agent id.
std::string serialize_graph(
    const CallingTree& tree,
    const std::unordered_map<std::string, const AgentRecord*>& agents_by_id);

class Encoder {
public:
    explicit Encoder(std::size_t dim = kDefaultEmbeddingDim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }

    // Zero vector for empty text; otherwise L2-normalized token counts.
    EmbeddingVector encode_text(const std::string& text) const;

    // encode_text over the agent profile, unless the sidecar has this id.
    EmbeddingVector encode_agent(const AgentRecord& agent) const;

    // encode_text over serialize_graph, unless the sidecar has session_id.
    EmbeddingVector encode_graph(
        const CallingTree& tree,
        const std::unordered_map<std::string, const AgentRecord*>& agents_by_id) const;
    EmbeddingVector encode_serialized(const std::string& session_id,
                                      const std::string& serialized) const;

    // JSONL sidecar {"id":..., "vector":[...]}; all vectors must share one
    // dimension, which replaces dim(). Duplicate ids: last wins, warned.
    // Throws std::runtime_error listing offending ids on ragged dimensions.
    void load_sidecar(const std::string& path);

    bool has_sidecar() const { return !sidecar_.empty(); }
    const std::string& sidecar_digest() const { return sidecar_digest_; }
    const std::vector<std::string>& sidecar_warnings() const { return warnings_; }

private:
    std::size_t dim_;
    std::unordered_map<std::string, EmbeddingVector> sidecar_;
    std::string sidecar_digest_;
    std::vector<std::string> warnings_;
};

}  // namespace agentrec

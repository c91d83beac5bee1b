#include "agentrec/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace agentrec {

namespace {
constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;
}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    return fnv1a64(bytes.data(), bytes.size(), kFnvOffset);
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine: dimension mismatch (" +
                                    std::to_string(u.size()) + " vs " +
                                    std::to_string(v.size()) + ")");
    }
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0 || nv == 0) return 0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

EmbeddingVector Encoder::encode_text(const std::string& text) const {
    EmbeddingVector vec(dim_, 0.0);
    double norm_sq = 0;
    for (const auto& token : tokenize(text)) {
        vec[fnv1a64(token) % dim_] += 1.0;
    }
    for (double x : vec) norm_sq += x * x;
    if (norm_sq > 0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double& x : vec) x *= inv;
    }
    return vec;
}

EmbeddingVector Encoder::encode_agent(const AgentRecord& agent) const {
    auto it = sidecar_.find(agent.id);
    if (it != sidecar_.end()) return it->second;
    return encode_text(agent.profile_text());
}

namespace {

std::string escaped_description(const std::string& desc) {
    std::string out;
    out.reserve(desc.size());
    for (char c : desc) {
        if (c == ')') out += "\\)";
        else out.push_back(c);
    }
    return out;
}

void serialize_subtree(
    const CallingTree& tree, const CallNode& node,
    const std::unordered_map<std::string, const AgentRecord*>& agents_by_id,
    const std::unordered_map<std::string, std::vector<const CallNode*>>& children,
    std::string& out) {
    auto it = agents_by_id.find(node.agent_id);
    if (it != agents_by_id.end()) {
        out += it->second->name;
        out += " (";
        out += escaped_description(it->second->description);
        out += ')';
    } else {
        out += node.agent_id;
        out += " ()";
    }
    auto kids = children.find(node.node_id);
    if (kids == children.end()) return;
    for (const CallNode* child : kids->second) {
        out += " CALLER->CALLEE ";
        serialize_subtree(tree, *child, agents_by_id, children, out);
    }
}

}  // namespace

std::string serialize_graph(
    const CallingTree& tree,
    const std::unordered_map<std::string, const AgentRecord*>& agents_by_id) {
    const CallNode* root = tree.root();
    if (!root) return "";

    std::unordered_map<std::string, std::vector<const CallNode*>> children;
    for (const auto& node : tree.nodes) {
        if (node.parent) children[*node.parent].push_back(&node);
    }
    for (auto& [id, kids] : children) {
        std::sort(kids.begin(), kids.end(), [](const CallNode* a, const CallNode* b) {
            if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
            return a->node_id < b->node_id;
        });
    }

    std::string out;
    serialize_subtree(tree, *root, agents_by_id, children, out);
    return out;
}

EmbeddingVector Encoder::encode_serialized(const std::string& session_id,
                                           const std::string& serialized) const {
    auto it = sidecar_.find(session_id);
    if (it != sidecar_.end()) return it->second;
    return encode_text(serialized);
}

EmbeddingVector Encoder::encode_graph(
    const CallingTree& tree,
    const std::unordered_map<std::string, const AgentRecord*>& agents_by_id) const {
    return encode_serialized(tree.session_id, serialize_graph(tree, agents_by_id));
}

void Encoder::load_sidecar(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open sidecar file: " + path);

    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    std::unordered_map<std::string, EmbeddingVector> loaded;
    std::size_t loaded_dim = 0;
    std::vector<std::string> ragged;

    std::istringstream lines(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("sidecar line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
        if (!row.contains("id") || !row.contains("vector") || !row["vector"].is_array()) {
            throw std::runtime_error("sidecar line " + std::to_string(line_no) +
                                     ": expected {\"id\", \"vector\"}");
        }
        const std::string id = row["id"].get<std::string>();
        EmbeddingVector vec = row["vector"].get<EmbeddingVector>();
        if (loaded_dim == 0) loaded_dim = vec.size();
        if (vec.size() != loaded_dim) {
            ragged.push_back(id);
            continue;
        }
        if (loaded.count(id)) {
            warnings_.push_back("duplicate sidecar id '" + id + "', last occurrence wins");
        }
        loaded[id] = std::move(vec);
    }
    if (!ragged.empty()) {
        std::string msg = "sidecar has ragged dimensions; offending ids:";
        for (const auto& id : ragged) msg += " " + id;
        throw std::runtime_error(msg);
    }

    sidecar_ = std::move(loaded);
    if (loaded_dim > 0) dim_ = loaded_dim;

    char digest[17];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    sidecar_digest_ = digest;
}

}  // namespace agentrec

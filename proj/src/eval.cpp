#include "agentrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace agentrec {

namespace {

double unit_from_hash(std::uint64_t h) {
    return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

std::uint64_t split_hash(const std::string& instance_id, std::uint64_t seed) {
    std::uint64_t h = fnv1a64(instance_id);
    std::uint8_t bytes[8];
    for (int i = 0; i < 8; ++i)
        bytes[i] = static_cast<std::uint8_t>((seed >> (8 * i)) & 0xff);
    return fnv1a64(bytes, sizeof(bytes), h);
}

}  // namespace

SplitResult split_dataset(const std::vector<DecisionInstance>& instances,
                          double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument(
            "split_dataset: train_fraction must be in (0,1)");
    if (instances.size() < 2)
        throw std::invalid_argument(
            "split_dataset: need at least 2 instances");
    SplitResult out;
    for (const DecisionInstance& inst : instances) {
        if (unit_from_hash(split_hash(inst.instance_id, seed)) < train_fraction)
            out.train.push_back(inst);
        else
            out.test.push_back(inst);
    }
    return out;
}

double retrieval_success_rate(const CorpusIndex& index,
                              const std::vector<DecisionInstance>& instances,
                              std::uint64_t k) {
    if (instances.empty()) throw std::invalid_argument("empty eval set");
    std::uint64_t hits = 0;
    for (const DecisionInstance& inst : instances) {
        const auto stage1 = retrieve(index, inst.kind, inst.query, k);
        for (const auto& [id, sim] : stage1)
            if (id == inst.gold_id) {
                ++hits;
                break;
            }
    }
    return static_cast<double>(hits) / static_cast<double>(instances.size());
}

namespace {

struct RankedInstance {
    std::int64_t gold_rank = -1;
    bool retrieved = false;
    std::string chosen;
};

RankedInstance rank_instance(const Model& model, const CorpusIndex& index,
                             const DecisionInstance& inst,
                             std::uint64_t k_retrieve) {
    if (inst.kind != model.kind)
        throw std::invalid_argument("instance kind does not match model kind: " +
                                    inst.instance_id);
    const auto stage1 = retrieve(index, model.kind, inst.query, k_retrieve);
    RankedInstance out;
    for (const auto& [id, sim] : stage1)
        if (id == inst.gold_id) {
            out.retrieved = true;
            break;
        }
    const Recommendation rec = rerank(model, index, inst.query, stage1);
    out.chosen = rec.chosen;
    for (std::size_t i = 0; i < rec.candidates.size(); ++i)
        if (rec.candidates[i].id == inst.gold_id) {
            out.gold_rank = static_cast<std::int64_t>(i);
            break;
        }
    return out;
}

}  // namespace

std::map<std::uint64_t, double> top_k_accuracy(
    const Model& model, const CorpusIndex& index,
    const std::vector<DecisionInstance>& instances, std::uint64_t k_retrieve,
    const std::vector<std::uint64_t>& k_eval) {
    if (instances.empty()) throw std::invalid_argument("empty eval set");
    std::map<std::uint64_t, std::uint64_t> hits;
    for (std::uint64_t k : k_eval) hits[k] = 0;
    for (const DecisionInstance& inst : instances) {
        const RankedInstance r = rank_instance(model, index, inst, k_retrieve);
        if (r.gold_rank < 0) continue;
        for (std::uint64_t k : k_eval)
            if (static_cast<std::uint64_t>(r.gold_rank) < k) ++hits[k];
    }
    std::map<std::uint64_t, double> out;
    for (const auto& [k, h] : hits)
        out[k] = static_cast<double>(h) / static_cast<double>(instances.size());
    return out;
}

SlateBuild build_training_slates(const CorpusIndex& index,
                                 const std::vector<DecisionInstance>& instances,
                                 std::uint64_t k) {
    SlateBuild out;
    for (const DecisionInstance& inst : instances) {
        const bool known = inst.kind == InstanceKind::agent
                               ? index.agent(inst.gold_id) != nullptr
                               : index.system(inst.gold_id) != nullptr;
        if (!known) {
            ++out.dropped;
            continue;
        }
        Slate slate;
        slate.query = inst.query;
        slate.kind = inst.kind;
        const auto stage1 = retrieve(index, inst.kind, inst.query, k);
        std::size_t gold_at = stage1.size();
        for (std::size_t i = 0; i < stage1.size(); ++i) {
            slate.candidate_ids.push_back(stage1[i].first);
            if (stage1[i].first == inst.gold_id) gold_at = i;
        }
        if (gold_at == stage1.size()) {
            slate.candidate_ids.push_back(inst.gold_id);  // force-include
            ++out.gold_forced;
        }
        slate.gold_index = gold_at;
        out.slates.push_back(std::move(slate));
    }
    return out;
}

TokenCostVariant token_cost_variant_from_string(const std::string& s) {
    if (s == "ctx") return TokenCostVariant::ctx;
    if (s == "item") return TokenCostVariant::item;
    if (s == "direct") return TokenCostVariant::direct;
    if (s == "two_stage") return TokenCostVariant::two_stage;
    if (s == "direct_graph") return TokenCostVariant::direct_graph;
    if (s == "two_stage_graph") return TokenCostVariant::two_stage_graph;
    throw std::invalid_argument("unknown token-cost variant: " + s);
}

namespace {

std::uint64_t req_u64(const std::optional<std::uint64_t>& v, const char* name) {
    if (!v)
        throw std::invalid_argument(
            std::string("token_cost: missing parameter ") + name);
    return *v;
}

std::uint64_t add_u64(std::uint64_t a, std::uint64_t b) {
    if (a > std::numeric_limits<std::uint64_t>::max() - b)
        throw std::overflow_error("token_cost: overflow");
    return a + b;
}

std::uint64_t mul_u64(std::uint64_t a, std::uint64_t b) {
    if (a && b > std::numeric_limits<std::uint64_t>::max() / a)
        throw std::overflow_error("token_cost: overflow");
    return a * b;
}

double req_real(const std::optional<double>& v, const char* name) {
    if (!v)
        throw std::invalid_argument(
            std::string("token_cost: missing parameter ") + name);
    return *v;
}

}  // namespace

std::uint64_t token_cost(const TokenCostParams& p, TokenCostVariant variant) {
    const auto ctx = [&]() {
        return mul_u64(req_u64(p.context_nodes, "context_nodes"),
                       req_u64(p.context_node_tokens, "context_node_tokens"));
    };
    const auto item = [&]() {
        return add_u64(req_u64(p.item_tokens, "item_tokens"), ctx());
    };
    const auto graph_item = [&]() {
        const double s = req_real(p.avg_subgraph_nodes, "avg_subgraph_nodes");
        if (!(s >= 0) || std::floor(s) != s)
            throw std::invalid_argument(
                "token_cost: avg_subgraph_nodes must be a non-negative integer "
                "in exact mode");
        return add_u64(
            mul_u64(static_cast<std::uint64_t>(s),
                    req_u64(p.subgraph_node_tokens, "subgraph_node_tokens")),
            ctx());
    };
    switch (variant) {
        case TokenCostVariant::ctx:
            return ctx();
        case TokenCostVariant::item:
            return item();
        case TokenCostVariant::direct:
            return mul_u64(req_u64(p.pool_size, "pool_size"), item());
        case TokenCostVariant::two_stage: {
            const std::uint64_t n = req_u64(p.pool_size, "pool_size");
            const std::uint64_t k = req_u64(p.shortlist, "shortlist");
            if (k > n)
                throw std::invalid_argument(
                    "token_cost: shortlist exceeds pool_size");
            return mul_u64(add_u64(n, k), item());
        }
        case TokenCostVariant::direct_graph:
            return mul_u64(req_u64(p.graph_pool_size, "graph_pool_size"),
                           graph_item());
        case TokenCostVariant::two_stage_graph: {
            const std::uint64_t m = req_u64(p.graph_pool_size, "graph_pool_size");
            const std::uint64_t kg =
                req_u64(p.graph_shortlist, "graph_shortlist");
            if (kg > m)
                throw std::invalid_argument(
                    "token_cost: graph_shortlist exceeds graph_pool_size");
            return mul_u64(add_u64(m, kg), graph_item());
        }
    }
    throw std::logic_error("token_cost: unhandled variant");
}

double token_cost_expected(const TokenCostParamsReal& p,
                           TokenCostVariant variant) {
    const auto ctx = [&]() {
        return req_real(p.context_nodes, "context_nodes") *
               req_real(p.context_node_tokens, "context_node_tokens");
    };
    const auto item = [&]() {
        return req_real(p.item_tokens, "item_tokens") + ctx();
    };
    const auto graph_item = [&]() {
        return req_real(p.avg_subgraph_nodes, "avg_subgraph_nodes") *
                   req_real(p.subgraph_node_tokens, "subgraph_node_tokens") +
               ctx();
    };
    switch (variant) {
        case TokenCostVariant::ctx:
            return ctx();
        case TokenCostVariant::item:
            return item();
        case TokenCostVariant::direct:
            return req_real(p.pool_size, "pool_size") * item();
        case TokenCostVariant::two_stage: {
            const double n = req_real(p.pool_size, "pool_size");
            const double k = req_real(p.shortlist, "shortlist");
            if (k > n)
                throw std::invalid_argument(
                    "token_cost: shortlist exceeds pool_size");
            return (n + k) * item();
        }
        case TokenCostVariant::direct_graph:
            return req_real(p.graph_pool_size, "graph_pool_size") * graph_item();
        case TokenCostVariant::two_stage_graph: {
            const double m = req_real(p.graph_pool_size, "graph_pool_size");
            const double kg = req_real(p.graph_shortlist, "graph_shortlist");
            if (kg > m)
                throw std::invalid_argument(
                    "token_cost: graph_shortlist exceeds graph_pool_size");
            return (m + kg) * graph_item();
        }
    }
    throw std::logic_error("token_cost: unhandled variant");
}

EvalReport evaluate(const Model& model, const CorpusIndex& index,
                    const std::vector<DecisionInstance>& instances,
                    const EvalConfig& config) {
    if (instances.empty()) throw std::invalid_argument("empty eval set");
    EvalReport report;
    report.dataset_id = config.dataset_id;
    report.kind = model.kind;
    report.k_retrieve = config.k_retrieve;
    report.lower_is_better = config.lower_is_better;
    report.instance_count = instances.size();

    std::uint64_t top1_hits = 0;
    std::uint64_t retrieved_hits = 0;
    std::map<std::uint64_t, std::uint64_t> k_hits;
    for (std::uint64_t k : config.k_eval) k_hits[k] = 0;

    report.per_query.reserve(instances.size());
    for (const DecisionInstance& inst : instances) {
        const RankedInstance r =
            rank_instance(model, index, inst, config.k_retrieve);
        PerQueryRecord rec;
        rec.instance_id = inst.instance_id;
        rec.gold_id = inst.gold_id;
        rec.chosen = r.chosen;
        rec.gold_rank = r.gold_rank;
        rec.retrieved = r.retrieved;
        report.per_query.push_back(std::move(rec));
        if (r.retrieved) ++retrieved_hits;
        if (r.gold_rank == 0) ++top1_hits;
        if (r.gold_rank >= 0)
            for (std::uint64_t k : config.k_eval)
                if (static_cast<std::uint64_t>(r.gold_rank) < k) ++k_hits[k];
    }
    const double n = static_cast<double>(instances.size());
    report.top_1 = static_cast<double>(top1_hits) / n;
    report.retrieval_sr = static_cast<double>(retrieved_hits) / n;
    for (const auto& [k, h] : k_hits)
        report.top_k[k] = static_cast<double>(h) / n;

    std::string canon = config.dataset_id + "|" +
                        std::to_string(config.k_retrieve) + "|";
    for (std::uint64_t k : config.k_eval) canon += std::to_string(k) + ",";
    canon += std::string("|") + (config.lower_is_better ? "1" : "0") + "|" +
             std::to_string(config.seed);
    char digest[32];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canon)));
    report.config_digest = digest;
    return report;
}

std::string report_to_json(const EvalReport& report, bool deterministic) {
    nlohmann::ordered_json j;
    j["dataset_id"] = report.dataset_id;
    j["kind"] = report.kind == InstanceKind::agent ? "agent" : "system";
    j["k_retrieve"] = report.k_retrieve;
    j["instance_count"] = report.instance_count;
    j["top_1"] = report.top_1;
    j["top_k"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.top_k)
        j["top_k"][std::to_string(k)] = v;
    j["retrieval_sr"] = report.retrieval_sr;
    j["lower_is_better"] = report.lower_is_better;
    j["config_digest"] = report.config_digest;
    if (!deterministic) {
        char buf[32];
        const std::time_t now = std::time(nullptr);
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        j["generated_at"] = buf;
    }
    j["per_query"] = nlohmann::ordered_json::array();
    for (const PerQueryRecord& r : report.per_query) {
        nlohmann::ordered_json q;
        q["instance_id"] = r.instance_id;
        q["gold_id"] = r.gold_id;
        q["chosen"] = r.chosen;
        q["gold_rank"] = r.gold_rank;
        q["retrieved"] = r.retrieved;
        j["per_query"].push_back(std::move(q));
    }
    return j.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& report) {
    auto fmt = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::string out = "metric,dataset,variant,value\n";
    out += "top_1," + report.dataset_id + ",two_stage," + fmt(report.top_1) + "\n";
    for (const auto& [k, v] : report.top_k)
        out += "top_" + std::to_string(k) + "," + report.dataset_id +
               ",two_stage," + fmt(v) + "\n";
    out += "retrieval_sr," + report.dataset_id + ",stage1," +
           fmt(report.retrieval_sr) + "\n";
    out += "k_retrieve," + report.dataset_id + ",stage1," +
           std::to_string(report.k_retrieve) + "\n";
    out += "instance_count," + report.dataset_id + ",data," +
           std::to_string(report.instance_count) + "\n";
    out += std::string("lower_is_better,") + report.dataset_id + ",data," +
           (report.lower_is_better ? "1" : "0") + "\n";
    return out;
}

}  // namespace agentrec

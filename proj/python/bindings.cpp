// Python bindings for the agentrec core: file-level pipeline operations
// (synth/ingest/train/recommend/evaluate), the deterministic encoder, and
// the closed-form token-cost calculator.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "agentrec/eval.hpp"
#include "agentrec/ingest.hpp"
#include "agentrec/pipeline.hpp"
#include "agentrec/ranker.hpp"
#include "agentrec/synth.hpp"
#include "agentrec/trace_model.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object json_to_py(const json& j) {
    using value_t = json::value_t;
    switch (j.type()) {
        case value_t::null:
            return py::none();
        case value_t::boolean:
            return py::bool_(j.get<bool>());
        case value_t::number_integer:
            return py::int_(j.get<long long>());
        case value_t::number_unsigned:
            return py::int_(j.get<unsigned long long>());
        case value_t::number_float:
            return py::float_(j.get<double>());
        case value_t::string:
            return py::str(j.get<std::string>());
        case value_t::array: {
            py::list out;
            for (const auto& e : j) out.append(json_to_py(e));
            return out;
        }
        case value_t::object: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = json_to_py(v);
            return out;
        }
        default:
            return py::none();
    }
}

agentrec::Encoder make_encoder(const std::string& sidecar) {
    agentrec::Encoder enc;
    if (!sidecar.empty()) enc.load_sidecar(sidecar);
    return enc;
}

template <typename T>
std::optional<T> kw(const py::kwargs& kwargs, const char* key) {
    if (!kwargs.contains(key)) return std::nullopt;
    return kwargs[key].cast<T>();
}

void check_token_kwargs(const py::kwargs& kwargs) {
    static const char* allowed[] = {
        "pool_size",       "shortlist",          "graph_pool_size",
        "graph_shortlist", "item_tokens",        "avg_subgraph_nodes",
        "subgraph_node_tokens", "context_nodes", "context_node_tokens"};
    for (const auto& item : kwargs) {
        const std::string name = py::cast<std::string>(item.first);
        bool ok = false;
        for (const char* a : allowed)
            if (name == a) ok = true;
        if (!ok)
            throw std::invalid_argument("token_cost: unknown parameter " + name);
    }
}

std::uint64_t py_token_cost(const std::string& variant, const py::kwargs& kwargs) {
    check_token_kwargs(kwargs);
    agentrec::TokenCostParams p;
    p.pool_size = kw<std::uint64_t>(kwargs, "pool_size");
    p.shortlist = kw<std::uint64_t>(kwargs, "shortlist");
    p.graph_pool_size = kw<std::uint64_t>(kwargs, "graph_pool_size");
    p.graph_shortlist = kw<std::uint64_t>(kwargs, "graph_shortlist");
    p.item_tokens = kw<std::uint64_t>(kwargs, "item_tokens");
    p.avg_subgraph_nodes = kw<double>(kwargs, "avg_subgraph_nodes");
    p.subgraph_node_tokens = kw<std::uint64_t>(kwargs, "subgraph_node_tokens");
    p.context_nodes = kw<std::uint64_t>(kwargs, "context_nodes");
    p.context_node_tokens = kw<std::uint64_t>(kwargs, "context_node_tokens");
    return agentrec::token_cost(p, agentrec::token_cost_variant_from_string(variant));
}

double py_token_cost_expected(const std::string& variant, const py::kwargs& kwargs) {
    check_token_kwargs(kwargs);
    agentrec::TokenCostParamsReal p;
    p.pool_size = kw<double>(kwargs, "pool_size");
    p.shortlist = kw<double>(kwargs, "shortlist");
    p.graph_pool_size = kw<double>(kwargs, "graph_pool_size");
    p.graph_shortlist = kw<double>(kwargs, "graph_shortlist");
    p.item_tokens = kw<double>(kwargs, "item_tokens");
    p.avg_subgraph_nodes = kw<double>(kwargs, "avg_subgraph_nodes");
    p.subgraph_node_tokens = kw<double>(kwargs, "subgraph_node_tokens");
    p.context_nodes = kw<double>(kwargs, "context_nodes");
    p.context_node_tokens = kw<double>(kwargs, "context_node_tokens");
    return agentrec::token_cost_expected(
        p, agentrec::token_cost_variant_from_string(variant));
}

void py_synth(const std::string& events_path, const std::string& manifest_path,
              std::uint64_t seed, std::uint64_t agents, std::uint64_t sessions,
              std::uint64_t depth_min, std::uint64_t depth_max,
              std::uint64_t branch_max, std::uint64_t vocab, bool planted) {
    agentrec::SynthConfig config;
    config.seed = seed;
    config.agent_count = agents;
    config.session_count = sessions;
    config.depth_min = depth_min;
    config.depth_max = depth_max;
    config.branch_max = branch_max;
    config.vocab_size = vocab;
    config.planted_signal = planted;
    agentrec::write_synth(agentrec::synth_corpus(config), events_path,
                          manifest_path);
}

py::dict py_ingest(const std::string& events_path, const std::string& corpus_path,
                   bool prune, const std::string& issues_path) {
    const agentrec::IngestResult result =
        agentrec::ingest_events_file(events_path, prune);
    agentrec::save_corpus(result.corpus, corpus_path);
    if (!issues_path.empty()) agentrec::save_issues(result.issues, issues_path);
    py::dict out;
    out["agents"] = result.stats.tool_count;
    out["graphs"] = result.stats.graph_count;
    out["nodes"] = result.stats.node_count;
    out["avg_calls_per_tool"] = result.stats.avg_calls_per_tool;
    out["avg_nodes_per_graph"] = result.stats.avg_nodes_per_graph;
    out["degenerate"] = result.stats.degenerate;
    out["pruned"] = result.pruned;
    out["issues"] = result.issues.size();
    return out;
}

py::dict py_train(const std::string& corpus_path, const std::string& model_path,
                  const std::string& mode, std::uint64_t k, double lambda_,
                  double lr, std::uint64_t batch, std::uint64_t epochs,
                  std::uint64_t seed, double train_fraction,
                  const std::string& sidecar) {
    const agentrec::Corpus corpus = agentrec::load_corpus(corpus_path);
    const agentrec::CorpusIndex index(corpus, make_encoder(sidecar));
    const agentrec::InstanceKind kind = mode == "asrl"
                                            ? agentrec::InstanceKind::system
                                            : agentrec::InstanceKind::agent;
    std::vector<agentrec::DecisionInstance> instances =
        kind == agentrec::InstanceKind::agent
            ? agentrec::extract_agent_instances(corpus.trees, corpus.agents)
            : agentrec::extract_system_instances(corpus.trees).instances;
    if (instances.empty())
        throw std::invalid_argument("train: no instances in corpus");
    std::vector<agentrec::DecisionInstance> train_set;
    if (train_fraction >= 1.0)
        train_set = std::move(instances);
    else
        train_set =
            agentrec::split_dataset(instances, train_fraction, seed).train;
    if (train_set.empty())
        throw std::invalid_argument("train: training split is empty");

    agentrec::TrainConfig config;
    config.lambda = lambda_;
    config.learning_rate = lr;
    config.batch_size = batch;
    config.epochs = epochs;
    config.seed = seed;

    const agentrec::SlateBuild slates =
        agentrec::build_training_slates(index, train_set, k);
    const agentrec::TrainResult result =
        agentrec::train(index, slates.slates, kind, config);
    agentrec::save_model(result.model, model_path);

    py::dict out;
    out["train_size"] = train_set.size();
    out["slates"] = slates.slates.size();
    out["gold_forced"] = slates.gold_forced;
    out["dropped"] = slates.dropped;
    out["final_top1"] = result.final_top1;
    out["loss_curve"] = result.model.loss_curve;
    return out;
}

py::dict py_recommend(const std::string& model_path,
                      const std::string& corpus_path, const std::string& query,
                      const std::string& method, std::uint64_t k,
                      const std::string& sidecar) {
    const agentrec::Model model = agentrec::load_model(model_path);
    const agentrec::Corpus corpus = agentrec::load_corpus(corpus_path);
    agentrec::Encoder enc = make_encoder(sidecar);
    if (enc.dim() != model.encoder_dim)
        throw std::invalid_argument("recommend: encoder dim mismatch");
    const agentrec::CorpusIndex index(corpus, std::move(enc));
    const agentrec::RecommendMode rmode =
        method == "direct" ? agentrec::RecommendMode::direct
                           : agentrec::RecommendMode::two_stage;
    const agentrec::Recommendation rec =
        agentrec::recommend(model, index, query, rmode, k);
    py::dict out;
    out["query"] = rec.query;
    out["mode"] = agentrec::to_string(rec.mode);
    out["k"] = rec.k_used;
    out["chosen"] = rec.chosen;
    py::list cands;
    for (const auto& c : rec.candidates) {
        py::dict cj;
        cj["id"] = c.id;
        if (rec.mode == agentrec::RecommendMode::two_stage)
            cj["stage1_similarity"] = c.stage1_similarity;
        cj["stage2_score"] = c.stage2_score;
        cands.append(std::move(cj));
    }
    out["candidates"] = std::move(cands);
    return out;
}

py::dict py_evaluate(const std::string& model_path, const std::string& corpus_path,
                     std::uint64_t k, const std::vector<std::uint64_t>& k_eval,
                     double train_fraction, const std::string& split,
                     std::uint64_t seed, bool lower_is_better, bool deterministic,
                     const std::string& dataset_id, const std::string& sidecar) {
    const agentrec::Model model = agentrec::load_model(model_path);
    const agentrec::Corpus corpus = agentrec::load_corpus(corpus_path);
    agentrec::Encoder enc = make_encoder(sidecar);
    if (enc.dim() != model.encoder_dim)
        throw std::invalid_argument("evaluate: encoder dim mismatch");
    const agentrec::CorpusIndex index(corpus, std::move(enc));

    std::vector<agentrec::DecisionInstance> instances =
        model.kind == agentrec::InstanceKind::agent
            ? agentrec::extract_agent_instances(corpus.trees, corpus.agents)
            : agentrec::extract_system_instances(corpus.trees).instances;
    if (instances.empty())
        throw std::invalid_argument("evaluate: no instances in corpus");

    std::vector<agentrec::DecisionInstance> chosen;
    if (split == "all") {
        chosen = std::move(instances);
    } else {
        auto s = agentrec::split_dataset(instances, train_fraction, seed);
        chosen = split == "train" ? std::move(s.train) : std::move(s.test);
    }

    agentrec::EvalConfig config;
    config.dataset_id = dataset_id.empty() ? corpus_path : dataset_id;
    config.k_retrieve = k;
    config.k_eval = k_eval;
    config.lower_is_better = lower_is_better;
    config.seed = seed;
    config.deterministic = deterministic;
    const agentrec::EvalReport report =
        agentrec::evaluate(model, index, chosen, config);
    return py::dict(py::cast<py::dict>(
        json_to_py(json::parse(agentrec::report_to_json(report, deterministic)))));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "agentrec core: calling-tree ingestion, deterministic encoding, "
        "two-stage recommendation, evaluation, and token-cost accounting";
    m.attr("__version__") = "0.1.0";

    m.def("encode_text",
          [](const std::string& text, std::size_t dim) {
              return agentrec::Encoder(dim).encode_text(text);
          },
          py::arg("text"), py::arg("dim") = agentrec::kDefaultEmbeddingDim,
          "Deterministic hashed term-frequency embedding, L2-normalized.");
    m.def("cosine", &agentrec::cosine, py::arg("u"), py::arg("v"),
          "Cosine similarity; 0.0 when either vector has zero norm.");
    m.def("fnv1a64",
          [](const std::string& s) { return agentrec::fnv1a64(s); },
          py::arg("data"), "FNV-1a 64-bit hash of a byte string.");
    m.def("token_cost", &py_token_cost, py::arg("variant"),
          "Exact integer prompt-token cost of a selection route.");
    m.def("token_cost_expected", &py_token_cost_expected, py::arg("variant"),
          "Expected (real-valued) prompt-token cost of a selection route.");
    m.def("synth", &py_synth, py::arg("events_path"), py::arg("manifest_path"),
          py::arg("seed") = 42, py::arg("agents") = 50, py::arg("sessions") = 250,
          py::arg("depth_min") = 3, py::arg("depth_max") = 3,
          py::arg("branch_max") = 0, py::arg("vocab") = 48,
          py::arg("planted") = true,
          "Write a deterministic synthetic event log and its manifest.");
    m.def("ingest", &py_ingest, py::arg("events_path"), py::arg("corpus_path"),
          py::arg("prune") = false, py::arg("issues_path") = "",
          "Normalize a JSONL event log into a corpus file; returns stats.");
    m.def("train", &py_train, py::arg("corpus_path"), py::arg("model_path"),
          py::arg("mode") = "sarl", py::arg("k") = 20, py::arg("lam") = 1e-4,
          py::arg("lr") = 1e-4, py::arg("batch") = 64, py::arg("epochs") = 50,
          py::arg("seed") = 42, py::arg("train_fraction") = 0.8,
          py::arg("sidecar") = "",
          "Train the reranking scorer on a corpus; writes the model file.");
    m.def("recommend", &py_recommend, py::arg("model_path"),
          py::arg("corpus_path"), py::arg("query"),
          py::arg("method") = "two_stage", py::arg("k") = 20,
          py::arg("sidecar") = "",
          "Recommend an agent or system for a query.");
    m.def("evaluate", &py_evaluate, py::arg("model_path"), py::arg("corpus_path"),
          py::arg("k") = 20,
          py::arg("k_eval") = std::vector<std::uint64_t>{1, 5},
          py::arg("train_fraction") = 0.8, py::arg("split") = "test",
          py::arg("seed") = 42, py::arg("lower_is_better") = false,
          py::arg("deterministic") = true, py::arg("dataset_id") = "",
          py::arg("sidecar") = "",
          "Evaluate a model on a corpus split; returns the report as a dict.");
}

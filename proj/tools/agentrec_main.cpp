// agentrec: turn multi-agent event logs into calling trees, train the
// two-stage recommender, and evaluate it.
//
// Exit codes: 0 success, 2 I/O error, 3 empty/insufficient data, 4 usage.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "agentrec/eval.hpp"
#include "agentrec/ingest.hpp"
#include "agentrec/pipeline.hpp"
#include "agentrec/ranker.hpp"
#include "agentrec/synth.hpp"
#include "agentrec/trace_model.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitEmpty = 3;
constexpr int kExitUsage = 4;

struct CommonOpts {
    std::string sidecar;
    std::uint64_t seed = 42;
    std::uint64_t k = 20;
};

agentrec::Encoder make_encoder(const std::string& sidecar_path) {
    agentrec::Encoder enc;
    if (!sidecar_path.empty()) enc.load_sidecar(sidecar_path);
    for (const std::string& w : enc.sidecar_warnings())
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    return enc;
}

std::string basename_of(const std::string& path) {
    const auto pos = path.find_last_of("/\\");
    return pos == std::string::npos ? path : path.substr(pos + 1);
}

int cmd_ingest(const std::string& events_path, const std::string& out_path,
               bool prune, const std::string& issues_path) {
    try {
        const agentrec::IngestResult result =
            agentrec::ingest_events_file(events_path, prune);
        agentrec::save_corpus(result.corpus, out_path);
        if (!issues_path.empty())
            agentrec::save_issues(result.issues, issues_path);
        const agentrec::CorpusStats& s = result.stats;
        std::printf("agents: %llu\n", (unsigned long long)s.tool_count);
        std::printf("graphs: %llu\n", (unsigned long long)s.graph_count);
        std::printf("nodes: %llu\n", (unsigned long long)s.node_count);
        std::printf("avg_calls_per_tool: %.2f\n", s.avg_calls_per_tool);
        std::printf("avg_nodes_per_graph: %.2f\n", s.avg_nodes_per_graph);
        if (prune) std::printf("pruned: %llu\n", (unsigned long long)result.pruned);
        std::printf("issues: %zu\n", result.issues.size());
        std::printf("corpus written: %s\n", out_path.c_str());
        return kExitOk;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitEmpty;
    }
}

int cmd_train(const std::string& corpus_path, const std::string& model_path,
              const std::string& mode, const CommonOpts& common,
              const agentrec::TrainConfig& config, double train_fraction,
              bool allow_single_node) {
    try {
        const agentrec::Corpus corpus = agentrec::load_corpus(corpus_path);
        const agentrec::CorpusIndex index(corpus, make_encoder(common.sidecar));
        const agentrec::InstanceKind kind = mode == "asrl"
                                                ? agentrec::InstanceKind::system
                                                : agentrec::InstanceKind::agent;
        if (kind == agentrec::InstanceKind::system && !allow_single_node) {
            bool multi = false;
            for (const auto& t : corpus.trees)
                if (t.nodes.size() > 1) multi = true;
            if (!multi) {
                std::fprintf(stderr,
                             "error: asrl needs at least one multi-node session "
                             "(pass --allow-single-node to override)\n");
                return kExitEmpty;
            }
        }

        std::vector<agentrec::DecisionInstance> instances;
        std::uint64_t skipped = 0;
        if (kind == agentrec::InstanceKind::agent) {
            instances =
                agentrec::extract_agent_instances(corpus.trees, corpus.agents);
        } else {
            auto ext = agentrec::extract_system_instances(corpus.trees);
            instances = std::move(ext.instances);
            skipped = ext.skipped;
        }
        if (instances.empty()) {
            std::fprintf(stderr, "error: no training instances in corpus\n");
            return kExitEmpty;
        }

        std::vector<agentrec::DecisionInstance> train_set;
        std::size_t test_count = 0;
        if (train_fraction >= 1.0) {
            train_set = std::move(instances);
        } else {
            auto split = agentrec::split_dataset(instances, train_fraction,
                                                 config.seed);
            train_set = std::move(split.train);
            test_count = split.test.size();
        }
        if (train_set.empty()) {
            std::fprintf(stderr, "error: training split is empty\n");
            return kExitEmpty;
        }

        const agentrec::SlateBuild slates =
            agentrec::build_training_slates(index, train_set, common.k);
        if (slates.slates.empty()) {
            std::fprintf(stderr, "error: no usable training slates\n");
            return kExitEmpty;
        }

        const agentrec::TrainResult result =
            agentrec::train(index, slates.slates, kind, config);
        agentrec::save_model(result.model, model_path);

        std::printf("instances: %zu (train %zu / held-out %zu)\n",
                    train_set.size() + test_count, train_set.size(), test_count);
        if (skipped)
            std::printf("sessions skipped (empty query): %llu\n",
                        (unsigned long long)skipped);
        std::printf("slates: %zu (gold forced %llu, dropped %llu)\n",
                    slates.slates.size(),
                    (unsigned long long)slates.gold_forced,
                    (unsigned long long)slates.dropped);
        if (!result.model.loss_curve.empty())
            std::printf("epochs: %zu  first loss: %.6f  last loss: %.6f\n",
                        result.model.loss_curve.size(),
                        result.model.loss_curve.front(),
                        result.model.loss_curve.back());
        std::printf("final training top-1: %.4f\n", result.final_top1);
        std::printf("model written: %s\n", model_path.c_str());
        return kExitOk;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitEmpty;
    }
}

int cmd_recommend(const std::string& model_path, const std::string& corpus_path,
                  const std::string& query, const std::string& method,
                  const CommonOpts& common) {
    if (query.empty()) {
        std::fprintf(stderr, "error: --query must be non-empty\n");
        return kExitUsage;
    }
    try {
        const agentrec::Model model = agentrec::load_model(model_path);
        const agentrec::Corpus corpus = agentrec::load_corpus(corpus_path);
        agentrec::Encoder enc = make_encoder(common.sidecar);
        if (enc.dim() != model.encoder_dim) {
            std::fprintf(stderr,
                         "error: model expects encoder dim %zu but current "
                         "encoder has dim %zu\n",
                         model.encoder_dim, enc.dim());
            return kExitUsage;
        }
        if (enc.sidecar_digest() != model.sidecar_digest)
            std::fprintf(stderr,
                         "warning: sidecar digest differs from the one the "
                         "model was trained with\n");
        const agentrec::CorpusIndex index(corpus, std::move(enc));
        const agentrec::RecommendMode rmode =
            method == "direct" ? agentrec::RecommendMode::direct
                               : agentrec::RecommendMode::two_stage;
        const agentrec::Recommendation rec =
            agentrec::recommend(model, index, query, rmode, common.k);

        nlohmann::ordered_json j;
        j["query"] = rec.query;
        j["mode"] = agentrec::to_string(rec.mode);
        j["k"] = rec.k_used;
        j["chosen"] = rec.chosen;
        j["candidates"] = nlohmann::ordered_json::array();
        for (const auto& c : rec.candidates) {
            nlohmann::ordered_json cj;
            cj["id"] = c.id;
            if (rec.mode == agentrec::RecommendMode::two_stage)
                cj["stage1_similarity"] = c.stage1_similarity;
            cj["stage2_score"] = c.stage2_score;
            j["candidates"].push_back(std::move(cj));
        }
        std::printf("%s\n", j.dump(2).c_str());
        return kExitOk;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitEmpty;
    }
}

int cmd_evaluate(const std::string& model_path, const std::string& corpus_path,
                 const std::string& report_prefix, const CommonOpts& common,
                 std::vector<std::uint64_t> k_eval, double train_fraction,
                 const std::string& split_name, const std::string& dataset_id,
                 bool lower_is_better, bool deterministic) {
    try {
        const agentrec::Model model = agentrec::load_model(model_path);
        const agentrec::Corpus corpus = agentrec::load_corpus(corpus_path);
        agentrec::Encoder enc = make_encoder(common.sidecar);
        if (enc.dim() != model.encoder_dim) {
            std::fprintf(stderr,
                         "error: model expects encoder dim %zu but current "
                         "encoder has dim %zu\n",
                         model.encoder_dim, enc.dim());
            return kExitUsage;
        }
        const agentrec::CorpusIndex index(corpus, std::move(enc));

        std::vector<agentrec::DecisionInstance> instances;
        if (model.kind == agentrec::InstanceKind::agent)
            instances =
                agentrec::extract_agent_instances(corpus.trees, corpus.agents);
        else
            instances =
                agentrec::extract_system_instances(corpus.trees).instances;
        if (instances.empty()) {
            std::fprintf(stderr, "error: no instances in corpus\n");
            return kExitEmpty;
        }

        std::vector<agentrec::DecisionInstance> chosen;
        if (split_name == "all") {
            chosen = std::move(instances);
        } else {
            auto split =
                agentrec::split_dataset(instances, train_fraction, common.seed);
            chosen = split_name == "train" ? std::move(split.train)
                                           : std::move(split.test);
        }
        if (chosen.empty()) {
            std::fprintf(stderr, "error: selected split is empty\n");
            return kExitEmpty;
        }

        agentrec::EvalConfig config;
        config.dataset_id =
            dataset_id.empty() ? basename_of(corpus_path) : dataset_id;
        config.k_retrieve = common.k;
        config.k_eval = std::move(k_eval);
        config.lower_is_better = lower_is_better;
        config.seed = common.seed;
        config.deterministic = deterministic;

        const agentrec::EvalReport report =
            agentrec::evaluate(model, index, chosen, config);

        const std::string json_path = report_prefix + ".json";
        const std::string csv_path = report_prefix + ".csv";
        {
            std::FILE* f = std::fopen(json_path.c_str(), "w");
            if (!f) throw std::runtime_error("cannot write report: " + json_path);
            const std::string body =
                agentrec::report_to_json(report, deterministic);
            std::fwrite(body.data(), 1, body.size(), f);
            std::fclose(f);
        }
        {
            std::FILE* f = std::fopen(csv_path.c_str(), "w");
            if (!f) throw std::runtime_error("cannot write report: " + csv_path);
            const std::string body = agentrec::report_to_csv(report);
            std::fwrite(body.data(), 1, body.size(), f);
            std::fclose(f);
        }

        std::printf("dataset: %s\n", report.dataset_id.c_str());
        std::printf("kind: %s\n",
                    report.kind == agentrec::InstanceKind::agent ? "sarl (agent)"
                                                                 : "asrl (system)");
        std::printf("instances: %llu\n",
                    (unsigned long long)report.instance_count);
        std::printf("k_retrieve: %llu\n", (unsigned long long)report.k_retrieve);
        std::printf("top_1: %.4f\n", report.top_1);
        for (const auto& [k, v] : report.top_k)
            std::printf("top_%llu: %.4f\n", (unsigned long long)k, v);
        std::printf("retrieval_sr: %.4f\n", report.retrieval_sr);
        std::printf("reports written: %s %s\n", json_path.c_str(),
                    csv_path.c_str());
        return kExitOk;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitEmpty;
    }
}

int cmd_tokencost(const std::string& variant_name, bool expected,
                  const std::map<std::string, double>& given) {
    try {
        const agentrec::TokenCostVariant variant =
            agentrec::token_cost_variant_from_string(variant_name);
        auto opt_real = [&](const char* key) -> std::optional<double> {
            auto it = given.find(key);
            if (it == given.end()) return std::nullopt;
            return it->second;
        };
        if (expected) {
            agentrec::TokenCostParamsReal p;
            p.pool_size = opt_real("pool_size");
            p.shortlist = opt_real("shortlist");
            p.graph_pool_size = opt_real("graph_pool_size");
            p.graph_shortlist = opt_real("graph_shortlist");
            p.item_tokens = opt_real("item_tokens");
            p.avg_subgraph_nodes = opt_real("avg_subgraph_nodes");
            p.subgraph_node_tokens = opt_real("subgraph_node_tokens");
            p.context_nodes = opt_real("context_nodes");
            p.context_node_tokens = opt_real("context_node_tokens");
            std::printf("%.17g\n", agentrec::token_cost_expected(p, variant));
            return kExitOk;
        }
        auto opt_u64 = [&](const char* key) -> std::optional<std::uint64_t> {
            auto it = given.find(key);
            if (it == given.end()) return std::nullopt;
            if (!(it->second >= 0) || std::floor(it->second) != it->second)
                throw std::invalid_argument(
                    std::string("token_cost: parameter ") + key +
                    " must be a non-negative integer in exact mode "
                    "(use --expected for real-valued averages)");
            return static_cast<std::uint64_t>(it->second);
        };
        agentrec::TokenCostParams p;
        p.pool_size = opt_u64("pool_size");
        p.shortlist = opt_u64("shortlist");
        p.graph_pool_size = opt_u64("graph_pool_size");
        p.graph_shortlist = opt_u64("graph_shortlist");
        p.item_tokens = opt_u64("item_tokens");
        p.avg_subgraph_nodes = opt_real("avg_subgraph_nodes");
        p.subgraph_node_tokens = opt_u64("subgraph_node_tokens");
        p.context_nodes = opt_u64("context_nodes");
        p.context_node_tokens = opt_u64("context_node_tokens");
        std::printf("%llu\n",
                    (unsigned long long)agentrec::token_cost(p, variant));
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr,
                     "usage: agentrec tokencost --variant V [--pool-size N] "
                     "[--shortlist K] [--item-tokens L] [--context-nodes C] "
                     "[--context-node-tokens T] [--graph-pool-size M] "
                     "[--graph-shortlist Kg] [--avg-subgraph-nodes S] "
                     "[--subgraph-node-tokens Ls] [--expected]\n");
        return kExitUsage;
    }
}

int cmd_synth(const agentrec::SynthConfig& config, const std::string& events_path,
              const std::string& manifest_path) {
    try {
        const agentrec::SynthOutput out = agentrec::synth_corpus(config);
        agentrec::write_synth(out, events_path, manifest_path);
        std::printf("events written: %s\n", events_path.c_str());
        std::printf("manifest written: %s\n", manifest_path.c_str());
        return kExitOk;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "agentrec: calling-tree construction and two-stage agent/system "
        "recommendation"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "read options from a config file; flags take precedence");

    // ingest
    auto* ingest = app.add_subcommand(
        "ingest", "normalize a JSONL event log into a corpus file");
    std::string in_events, in_out = "corpus.json", in_issues;
    bool in_prune = false;
    ingest->add_option("--events", in_events, "input events file (JSON Lines)")
        ->required();
    ingest->add_option("--out", in_out, "output corpus path")
        ->capture_default_str();
    ingest->add_option("--issues", in_issues,
                       "also write the skip/warning report (JSON Lines)");
    ingest->add_flag("--prune", in_prune,
                     "drop degenerate trees (non-root node count <= 1)");

    // train
    auto* train = app.add_subcommand(
        "train", "train the reranking scorer on a corpus");
    std::string tr_corpus, tr_model = "model.json", tr_mode = "sarl",
                tr_sidecar;
    agentrec::TrainConfig tr_config;
    double tr_fraction = 0.8;
    std::uint64_t tr_k = 20;
    bool tr_allow_single = false;
    train->add_option("--corpus", tr_corpus, "corpus file")->required();
    train->add_option("--out", tr_model, "output model path")
        ->capture_default_str();
    train->add_option("--mode", tr_mode, "recommendation task")
        ->check(CLI::IsMember({"sarl", "asrl"}))
        ->capture_default_str();
    train->add_option("--k", tr_k, "stage-1 shortlist size for slates")
        ->capture_default_str();
    train->add_option("--lambda", tr_config.lambda, "L2 regularization")
        ->capture_default_str();
    train->add_option("--lr", tr_config.learning_rate, "learning rate")
        ->capture_default_str();
    train->add_option("--batch", tr_config.batch_size, "mini-batch size")
        ->capture_default_str();
    train->add_option("--epochs", tr_config.epochs, "training epochs")
        ->capture_default_str();
    train->add_option("--seed", tr_config.seed, "random seed")
        ->envname("AGENTREC_SEED")
        ->capture_default_str();
    train
        ->add_option("--train-fraction", tr_fraction,
                     "hashed-id split fraction; 1.0 trains on everything")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    train->add_option("--sidecar", tr_sidecar,
                      "precomputed embeddings (JSON Lines)");
    train->add_flag("--allow-single-node", tr_allow_single,
                    "allow asrl on corpora with only single-node sessions");

    // recommend
    auto* recommend = app.add_subcommand(
        "recommend", "recommend an agent or system for a query");
    std::string rc_model, rc_corpus, rc_query, rc_method = "two_stage",
                rc_sidecar;
    std::uint64_t rc_k = 20;
    std::uint64_t rc_seed = 42;
    recommend->add_option("--model", rc_model, "model file")->required();
    recommend->add_option("--corpus", rc_corpus, "corpus file")->required();
    recommend->add_option("--query", rc_query, "query text")->required();
    recommend->add_option("--method", rc_method, "selection route")
        ->check(CLI::IsMember({"two_stage", "direct"}))
        ->capture_default_str();
    recommend->add_option("--k", rc_k, "stage-1 shortlist size")
        ->capture_default_str();
    recommend->add_option("--seed", rc_seed, "random seed")
        ->envname("AGENTREC_SEED")
        ->capture_default_str();
    recommend->add_option("--sidecar", rc_sidecar,
                          "precomputed embeddings (JSON Lines)");

    // evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "score a model on a corpus split and write reports");
    std::string ev_model, ev_corpus, ev_report = "report", ev_split = "test",
                ev_dataset, ev_sidecar;
    std::vector<std::uint64_t> ev_k_eval = {1, 5};
    double ev_fraction = 0.8;
    std::uint64_t ev_k = 20, ev_seed = 42;
    bool ev_lower = false, ev_deterministic = false;
    evaluate->add_option("--model", ev_model, "model file")->required();
    evaluate->add_option("--corpus", ev_corpus, "corpus file")->required();
    evaluate->add_option("--report", ev_report,
                         "report path prefix (writes .json and .csv)")
        ->capture_default_str();
    evaluate->add_option("--k", ev_k, "stage-1 shortlist size")
        ->capture_default_str();
    evaluate->add_option("--k-eval", ev_k_eval, "top-k cutoffs to report")
        ->delimiter(',')
        ->capture_default_str();
    evaluate
        ->add_option("--train-fraction", ev_fraction,
                     "hashed-id split fraction used to form train/test")
        ->check(CLI::Range(0.000001, 0.999999))
        ->capture_default_str();
    evaluate->add_option("--split", ev_split, "which split to evaluate")
        ->check(CLI::IsMember({"test", "train", "all"}))
        ->capture_default_str();
    evaluate->add_option("--dataset-id", ev_dataset,
                         "dataset label in reports (default: corpus filename)");
    evaluate->add_option("--seed", ev_seed, "random seed")
        ->envname("AGENTREC_SEED")
        ->capture_default_str();
    evaluate->add_option("--sidecar", ev_sidecar,
                         "precomputed embeddings (JSON Lines)");
    evaluate->add_flag("--lower-is-better", ev_lower,
                       "mark the dataset's metric orientation in reports");
    evaluate->add_flag("--deterministic", ev_deterministic,
                       "suppress timestamped report fields");

    // tokencost
    auto* tokencost = app.add_subcommand(
        "tokencost", "closed-form prompt-token cost of a selection route");
    std::string tc_variant;
    bool tc_expected = false;
    std::map<std::string, double> tc_given;
    double tc_pool = 0, tc_short = 0, tc_gpool = 0, tc_gshort = 0, tc_item = 0,
           tc_avg = 0, tc_subtok = 0, tc_ctxn = 0, tc_ctxt = 0;
    tokencost->add_option("--variant", tc_variant,
                          "ctx | item | direct | two_stage | direct_graph | "
                          "two_stage_graph")
        ->required();
    auto* o_pool = tokencost->add_option("--pool-size", tc_pool, "N");
    auto* o_short = tokencost->add_option("--shortlist", tc_short, "K");
    auto* o_gpool =
        tokencost->add_option("--graph-pool-size", tc_gpool, "M");
    auto* o_gshort =
        tokencost->add_option("--graph-shortlist", tc_gshort, "K_g");
    auto* o_item = tokencost->add_option("--item-tokens", tc_item, "L");
    auto* o_avg =
        tokencost->add_option("--avg-subgraph-nodes", tc_avg, "s");
    auto* o_subtok =
        tokencost->add_option("--subgraph-node-tokens", tc_subtok, "L_s");
    auto* o_ctxn = tokencost->add_option("--context-nodes", tc_ctxn, "|V_t|");
    auto* o_ctxt =
        tokencost->add_option("--context-node-tokens", tc_ctxt, "L_g");
    tokencost->add_flag("--expected", tc_expected,
                        "real-valued expected-cost mode");

    // synth
    auto* synth = app.add_subcommand(
        "synth", "generate a deterministic synthetic corpus");
    agentrec::SynthConfig sy_config;
    std::string sy_events = "events.jsonl", sy_manifest = "manifest.json";
    bool sy_no_planted = false;
    synth->add_option("--seed", sy_config.seed, "random seed")
        ->envname("AGENTREC_SEED")
        ->capture_default_str();
    synth->add_option("--agents", sy_config.agent_count, "specialist agents")
        ->capture_default_str();
    synth->add_option("--sessions", sy_config.session_count, "sessions")
        ->capture_default_str();
    synth->add_option("--depth-min", sy_config.depth_min,
                      "min tree levels incl. root")
        ->capture_default_str();
    synth->add_option("--depth-max", sy_config.depth_max,
                      "max tree levels incl. root")
        ->capture_default_str();
    synth->add_option("--branch-max", sy_config.branch_max,
                      "max extra leaf children")
        ->capture_default_str();
    synth->add_option("--vocab", sy_config.vocab_size, "filler vocabulary size")
        ->capture_default_str();
    synth->add_flag("--no-planted", sy_no_planted,
                    "disable the planted learnable signal");
    synth->add_option("--out", sy_events, "output events path")
        ->capture_default_str();
    synth->add_option("--manifest", sy_manifest, "output manifest path")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (ingest->parsed()) return cmd_ingest(in_events, in_out, in_prune, in_issues);
    if (train->parsed()) {
        CommonOpts common{tr_sidecar, tr_config.seed, tr_k};
        return cmd_train(tr_corpus, tr_model, tr_mode, common, tr_config,
                         tr_fraction, tr_allow_single);
    }
    if (recommend->parsed()) {
        CommonOpts common{rc_sidecar, rc_seed, rc_k};
        return cmd_recommend(rc_model, rc_corpus, rc_query, rc_method, common);
    }
    if (evaluate->parsed()) {
        CommonOpts common{ev_sidecar, ev_seed, ev_k};
        return cmd_evaluate(ev_model, ev_corpus, ev_report, common, ev_k_eval,
                            ev_fraction, ev_split, ev_dataset, ev_lower,
                            ev_deterministic);
    }
    if (tokencost->parsed()) {
        if (o_pool->count()) tc_given["pool_size"] = tc_pool;
        if (o_short->count()) tc_given["shortlist"] = tc_short;
        if (o_gpool->count()) tc_given["graph_pool_size"] = tc_gpool;
        if (o_gshort->count()) tc_given["graph_shortlist"] = tc_gshort;
        if (o_item->count()) tc_given["item_tokens"] = tc_item;
        if (o_avg->count()) tc_given["avg_subgraph_nodes"] = tc_avg;
        if (o_subtok->count()) tc_given["subgraph_node_tokens"] = tc_subtok;
        if (o_ctxn->count()) tc_given["context_nodes"] = tc_ctxn;
        if (o_ctxt->count()) tc_given["context_node_tokens"] = tc_ctxt;
        return cmd_tokencost(tc_variant, tc_expected, tc_given);
    }
    if (synth->parsed()) {
        sy_config.planted_signal = !sy_no_planted;
        return cmd_synth(sy_config, sy_events, sy_manifest);
    }
    return kExitUsage;
}

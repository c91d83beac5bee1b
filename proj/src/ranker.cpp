#include "agentrec/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace agentrec {

namespace {

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_array(const double* v, std::size_t n) {
    std::string out = "[";
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ", ";
        out += fmt_real(v[i]);
    }
    out += "]";
    return out;
}

}  // namespace

Model Model::init(InstanceKind kind) {
    Model m;
    m.kind = kind;
    m.w = {0.25, 0.25, 0.25, 0.25};
    m.w_coop = {0.2, 0.2, 0.2, 0.2, 0.2};
    const double s = 1.0 / 6.0;
    m.w_struct = {s, s, s, s, s, s};
    return m;
}

std::array<double, 15> Model::theta() const {
    std::array<double, 15> t{};
    for (std::size_t i = 0; i < 4; ++i) t[i] = w[i];
    for (std::size_t i = 0; i < 5; ++i) t[4 + i] = w_coop[i];
    for (std::size_t i = 0; i < 6; ++i) t[9 + i] = w_struct[i];
    return t;
}

void Model::set_theta(const std::array<double, 15>& t) {
    for (std::size_t i = 0; i < 4; ++i) w[i] = t[i];
    for (std::size_t i = 0; i < 5; ++i) w_coop[i] = t[4 + i];
    for (std::size_t i = 0; i < 6; ++i) w_struct[i] = t[9 + i];
}

CandidateFeatures candidate_features(const Model& model,
                                     const CorpusIndex& index,
                                     const std::string& query,
                                     const std::string& candidate_id) {
    CandidateFeatures cf;
    const EmbeddingVector qv = index.encoder().encode_text(query);
    if (model.kind == InstanceKind::agent) {
        const AgentRecord* agent = index.agent(candidate_id);
        if (!agent)
            throw std::invalid_argument("unknown agent candidate: " +
                                        candidate_id);
        cf.rel = cosine(qv, index.agent_embedding(candidate_id));
        cf.hist = phi_hist_agent(*agent);
        cf.coop_const = phi_coop_agent(index.encoder(), query, *agent);
        cf.pop_z = model.normalizer.z_agent_pop(agent->invocation_count);
    } else {
        const SystemCandidate* sys = index.system(candidate_id);
        if (!sys)
            throw std::invalid_argument("unknown system candidate: " +
                                        candidate_id);
        cf.rel = cosine(qv, index.system_embedding(candidate_id));
        cf.hist = phi_hist_graph(*sys->graph, index.agents_by_id());
        const GraphStats gs = graph_stats(*sys->graph);
        cf.z5 = model.normalizer.z5(gs);
        cf.z6 = model.normalizer.z6(gs);
    }
    return cf;
}

CachedSlate cache_slate(const Model& model, const CorpusIndex& index,
                        const Slate& slate) {
    if (slate.candidate_ids.empty())
        throw std::invalid_argument("empty slate: " + slate.query);
    if (slate.gold_index >= slate.candidate_ids.size())
        throw std::out_of_range("gold index out of range for slate: " +
                                slate.query);
    CachedSlate cs;
    cs.kind = slate.kind;
    cs.gold_index = slate.gold_index;
    cs.candidates.reserve(slate.candidate_ids.size());
    for (const std::string& id : slate.candidate_ids)
        cs.candidates.push_back(candidate_features(model, index, slate.query, id));
    return cs;
}

FeatureVector assemble_features(const Model& model, const CandidateFeatures& cf,
                                InstanceKind kind) {
    FeatureVector f;
    f.rel = cf.rel;
    f.hist = cf.hist;
    if (kind == InstanceKind::agent) {
        f.coop = cf.coop_const;
        f.struct_ = logistic(model.w_struct[0] * cf.pop_z);
    } else {
        double coop = 0;
        for (std::size_t i = 0; i < 5; ++i) coop += model.w_coop[i] * cf.z5[i];
        f.coop = coop;
        double u = 0;
        for (std::size_t i = 0; i < 6; ++i) u += model.w_struct[i] * cf.z6[i];
        f.struct_ = logistic(u);
    }
    return f;
}

double score_cached(const Model& model, const CandidateFeatures& cf,
                    InstanceKind kind) {
    const FeatureVector f = assemble_features(model, cf, kind);
    return model.w[0] * f.rel + model.w[1] * f.hist + model.w[2] * f.coop +
           model.w[3] * f.struct_;
}

double score(const Model& model, const CorpusIndex& index,
             const std::string& query, const std::string& candidate_id) {
    return score_cached(model, candidate_features(model, index, query, candidate_id),
                        model.kind);
}

namespace {

double theta_sq(const Model& model) {
    const auto t = model.theta();
    double s = 0;
    for (double v : t) s += v * v;
    return s;
}

// Scores for every candidate plus max-subtracted softmax terms.
struct SlateScores {
    std::vector<double> s;
    std::vector<double> p;  // softmax probabilities
    double lse = 0;         // log sum exp(s)
};

SlateScores slate_scores(const Model& model, const CachedSlate& slate) {
    SlateScores out;
    out.s.reserve(slate.candidates.size());
    for (const CandidateFeatures& cf : slate.candidates)
        out.s.push_back(score_cached(model, cf, slate.kind));
    const double m = *std::max_element(out.s.begin(), out.s.end());
    double sum = 0;
    out.p.resize(out.s.size());
    for (std::size_t i = 0; i < out.s.size(); ++i) {
        out.p[i] = std::exp(out.s[i] - m);
        sum += out.p[i];
    }
    for (double& v : out.p) v /= sum;
    out.lse = m + std::log(sum);
    return out;
}

}  // namespace

double slate_loss_cached(const Model& model, const CachedSlate& slate,
                         double lambda) {
    if (slate.candidates.empty())
        throw std::invalid_argument("empty slate");
    if (slate.gold_index >= slate.candidates.size())
        throw std::out_of_range("gold index out of range");
    const SlateScores sc = slate_scores(model, slate);
    return -sc.s[slate.gold_index] + sc.lse + lambda * theta_sq(model);
}

double slate_loss(const Model& model, const CorpusIndex& index,
                  const Slate& slate, double lambda) {
    return slate_loss_cached(model, cache_slate(model, index, slate), lambda);
}

std::array<double, 15> gradient_cached(const Model& model,
                                       const CachedSlate& slate,
                                       double lambda) {
    if (slate.candidates.empty())
        throw std::invalid_argument("empty slate");
    if (slate.gold_index >= slate.candidates.size())
        throw std::out_of_range("gold index out of range");
    const SlateScores sc = slate_scores(model, slate);
    std::array<double, 15> g{};
    for (std::size_t i = 0; i < slate.candidates.size(); ++i) {
        const CandidateFeatures& cf = slate.candidates[i];
        const FeatureVector f = assemble_features(model, cf, slate.kind);
        const double r = sc.p[i] - (i == slate.gold_index ? 1.0 : 0.0);
        const auto fa = f.as_array();
        for (std::size_t j = 0; j < 4; ++j) g[j] += r * fa[j];
        if (slate.kind == InstanceKind::agent) {
            const double sig = f.struct_;
            g[9] += r * model.w[3] * sig * (1.0 - sig) * cf.pop_z;
        } else {
            for (std::size_t j = 0; j < 5; ++j)
                g[4 + j] += r * model.w[2] * cf.z5[j];
            const double sig = f.struct_;
            for (std::size_t j = 0; j < 6; ++j)
                g[9 + j] += r * model.w[3] * sig * (1.0 - sig) * cf.z6[j];
        }
    }
    const auto t = model.theta();
    for (std::size_t j = 0; j < 15; ++j) g[j] += 2.0 * lambda * t[j];
    return g;
}

std::array<double, 15> gradient(const Model& model, const CorpusIndex& index,
                                const Slate& slate, double lambda) {
    return gradient_cached(model, cache_slate(model, index, slate), lambda);
}

TrainResult train(const CorpusIndex& index, const std::vector<Slate>& dataset,
                  InstanceKind kind, const TrainConfig& config) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    for (const Slate& s : dataset)
        if (s.kind != kind)
            throw std::invalid_argument("train: slate kind mismatch for query: " +
                                        s.query);

    Model model = Model::init(kind);
    model.normalizer = fit_normalizer(index.corpus().trees);
    fit_agent_popularity(model.normalizer, index.corpus().agents);
    model.encoder_dim = index.encoder().dim();
    model.sidecar_digest = index.encoder().sidecar_digest();
    model.train_config = config;

    std::vector<CachedSlate> cached;
    cached.reserve(dataset.size());
    for (const Slate& s : dataset)
        cached.push_back(cache_slate(model, index, s));

    const std::uint64_t batch =
        config.batch_size ? config.batch_size : std::uint64_t{1};
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(cached.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::uint64_t epoch = 0; epoch < config.epochs; ++epoch) {
        // Fisher-Yates with raw engine draws: std::shuffle is not
        // guaranteed to produce the same permutation across platforms.
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % i);
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(batch));
            std::array<double, 15> g{};
            for (std::size_t k = start; k < end; ++k) {
                const auto gi =
                    gradient_cached(model, cached[order[k]], config.lambda);
                for (std::size_t j = 0; j < 15; ++j) g[j] += gi[j];
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            auto t = model.theta();
            for (std::size_t j = 0; j < 15; ++j)
                t[j] -= config.learning_rate * inv * g[j];
            model.set_theta(t);
        }
        double loss_sum = 0;
        for (const CachedSlate& cs : cached)
            loss_sum += slate_loss_cached(model, cs, config.lambda);
        model.loss_curve.push_back(loss_sum /
                                   static_cast<double>(cached.size()));
    }

    std::uint64_t hits = 0;
    for (const CachedSlate& cs : cached) {
        std::size_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cs.candidates.size(); ++i) {
            const double s = score_cached(model, cs.candidates[i], cs.kind);
            if (s > best_score) {
                best_score = s;
                best = i;
            }
        }
        if (best == cs.gold_index) ++hits;
    }
    TrainResult out;
    out.model = std::move(model);
    out.final_top1 = static_cast<double>(hits) / static_cast<double>(cached.size());
    return out;
}

void save_model(const Model& model, const std::string& path) {
    std::string out = "{\n";
    out += "  \"version\": " + std::to_string(Model::kVersion) + ",\n";
    out += std::string("  \"kind\": \"") +
           (model.kind == InstanceKind::agent ? "agent" : "system") + "\",\n";
    out += "  \"w\": " + fmt_array(model.w.data(), 4) + ",\n";
    out += "  \"w_coop\": " + fmt_array(model.w_coop.data(), 5) + ",\n";
    out += "  \"w_struct\": " + fmt_array(model.w_struct.data(), 6) + ",\n";
    const NormalizationStats& n = model.normalizer;
    out += "  \"normalizer\": {\n";
    out += "    \"mean\": " + fmt_array(n.mean.data(), 6) + ",\n";
    out += "    \"stddev\": " + fmt_array(n.stddev.data(), 6) + ",\n";
    out += "    \"agent_pop_mean\": " + fmt_real(n.agent_pop_mean) + ",\n";
    out += "    \"agent_pop_std\": " + fmt_real(n.agent_pop_std) + ",\n";
    out += std::string("    \"graph_fitted\": ") +
           (n.graph_fitted ? "true" : "false") + ",\n";
    out += std::string("    \"agent_fitted\": ") +
           (n.agent_fitted ? "true" : "false") + "\n";
    out += "  },\n";
    out += "  \"encoder\": {\n";
    out += "    \"dim\": " + std::to_string(model.encoder_dim) + ",\n";
    out += "    \"sidecar_digest\": \"" + model.sidecar_digest + "\"\n";
    out += "  },\n";
    const TrainConfig& c = model.train_config;
    out += "  \"train_config\": {\n";
    out += "    \"lambda\": " + fmt_real(c.lambda) + ",\n";
    out += "    \"learning_rate\": " + fmt_real(c.learning_rate) + ",\n";
    out += "    \"batch_size\": " + std::to_string(c.batch_size) + ",\n";
    out += "    \"epochs\": " + std::to_string(c.epochs) + ",\n";
    out += "    \"seed\": " + std::to_string(c.seed) + "\n";
    out += "  },\n";
    out += "  \"loss_curve\": " +
           fmt_array(model.loss_curve.data(), model.loss_curve.size()) + "\n";
    out += "}\n";

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write model file: " + path);
    f << out;
    if (!f) throw std::runtime_error("write failed: " + path);
}

namespace {

template <std::size_t N>
void read_fixed_array(const nlohmann::json& j, const char* field,
                      std::array<double, N>& out) {
    const auto& arr = j.at(field);
    if (!arr.is_array() || arr.size() != N)
        throw std::runtime_error(std::string("model field '") + field +
                                 "' must be an array of " + std::to_string(N) +
                                 " numbers");
    for (std::size_t i = 0; i < N; ++i) out[i] = arr[i].get<double>();
}

}  // namespace

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid model file " + path + ": " + e.what());
    }
    try {
        if (j.at("version").get<int>() != Model::kVersion)
            throw std::runtime_error("unsupported model version in " + path);
        Model m;
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "agent")
            m.kind = InstanceKind::agent;
        else if (kind == "system")
            m.kind = InstanceKind::system;
        else
            throw std::runtime_error("model field 'kind' must be 'agent' or 'system'");
        read_fixed_array(j, "w", m.w);
        read_fixed_array(j, "w_coop", m.w_coop);
        read_fixed_array(j, "w_struct", m.w_struct);
        const auto& n = j.at("normalizer");
        read_fixed_array(n, "mean", m.normalizer.mean);
        read_fixed_array(n, "stddev", m.normalizer.stddev);
        m.normalizer.agent_pop_mean = n.at("agent_pop_mean").get<double>();
        m.normalizer.agent_pop_std = n.at("agent_pop_std").get<double>();
        m.normalizer.graph_fitted = n.at("graph_fitted").get<bool>();
        m.normalizer.agent_fitted = n.at("agent_fitted").get<bool>();
        const auto& e = j.at("encoder");
        m.encoder_dim = e.at("dim").get<std::size_t>();
        m.sidecar_digest = e.at("sidecar_digest").get<std::string>();
        const auto& c = j.at("train_config");
        m.train_config.lambda = c.at("lambda").get<double>();
        m.train_config.learning_rate = c.at("learning_rate").get<double>();
        m.train_config.batch_size = c.at("batch_size").get<std::uint64_t>();
        m.train_config.epochs = c.at("epochs").get<std::uint64_t>();
        m.train_config.seed = c.at("seed").get<std::uint64_t>();
        for (const auto& v : j.at("loss_curve"))
            m.loss_curve.push_back(v.get<double>());
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid model file " + path + ": " + e.what());
    }
}

}  // namespace agentrec

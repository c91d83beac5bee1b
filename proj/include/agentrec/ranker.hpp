#pragma once
// The linear scorer s(q,c) = w . Phi(q,c), its slate softmax cross-entropy
// loss with L2 regularization, exact analytic gradients, mini-batch
// gradient-descent training, and model persistence.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "agentrec/corpus.hpp"
#include "agentrec/features.hpp"
#include "agentrec/types.hpp"

namespace agentrec {

struct TrainConfig {
    double lambda = 1e-4;
    double learning_rate = 1e-4;
    std::uint64_t batch_size = 64;
    std::uint64_t epochs = 50;
    std::uint64_t seed = 42;
};

struct Model {
    static constexpr int kVersion = 1;

    InstanceKind kind = InstanceKind::agent;
    std::array<double, 4> w{};        // outer weights over Phi
    std::array<double, 5> w_coop{};   // graph-statistics weights
    std::array<double, 6> w_struct{}; // logistic structural weights
    NormalizationStats normalizer;
    std::size_t encoder_dim = kDefaultEmbeddingDim;
    std::string sidecar_digest;
    TrainConfig train_config;
    std::vector<double> loss_curve;

    static Model init(InstanceKind kind);

    // 15-parameter view used by the regularizer and the optimizer.
    std::array<double, 15> theta() const;
    void set_theta(const std::array<double, 15>& t);
};

// One query's candidate list; the unit of the listwise loss.
struct Slate {
    std::string query;
    InstanceKind kind = InstanceKind::agent;
    std::vector<std::string> candidate_ids;  // no duplicates
    std::size_t gold_index = 0;
};

// Theta-independent per-candidate inputs, precomputed once per slate so
// training epochs only redo the cheap parts.
struct CandidateFeatures {
    double rel = 0;
    double hist = 0;
    double coop_const = 0;          // agent kind: lexical coop value
    double pop_z = 0;               // agent kind: z-scored log1p(count)
    std::array<double, 5> z5{};     // system kind
    std::array<double, 6> z6{};     // system kind
};

struct CachedSlate {
    InstanceKind kind = InstanceKind::agent;
    std::size_t gold_index = 0;
    std::vector<CandidateFeatures> candidates;
};

CandidateFeatures candidate_features(const Model& model, const CorpusIndex& index,
                                     const std::string& query,
                                     const std::string& candidate_id);
CachedSlate cache_slate(const Model& model, const CorpusIndex& index,
                        const Slate& slate);

FeatureVector assemble_features(const Model& model, const CandidateFeatures& cf,
                                InstanceKind kind);

// w . Phi(q,c). Throws on kind mismatch.
double score(const Model& model, const CorpusIndex& index,
             const std::string& query, const std::string& candidate_id);
double score_cached(const Model& model, const CandidateFeatures& cf,
                    InstanceKind kind);

// -s(gold) + log sum exp(s(c)) + lambda * |theta|^2, max-subtracted.
double slate_loss(const Model& model, const CorpusIndex& index, const Slate& slate,
                  double lambda);
double slate_loss_cached(const Model& model, const CachedSlate& slate, double lambda);

// Exact gradient of slate_loss over theta = (w, w_coop, w_struct).
std::array<double, 15> gradient(const Model& model, const CorpusIndex& index,
                                const Slate& slate, double lambda);
std::array<double, 15> gradient_cached(const Model& model, const CachedSlate& slate,
                                       double lambda);

struct TrainResult {
    Model model;
    double final_top1 = 0;  // training-set top-1 after the last epoch
};

// Deterministic mini-batch gradient descent; per-epoch mean loss recorded
// in model.loss_curve. Throws on an empty dataset or mixed kinds.
TrainResult train(const CorpusIndex& index, const std::vector<Slate>& dataset,
                  InstanceKind kind, const TrainConfig& config);

// Model file: single JSON document, reals at 17 significant digits.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);  // throws naming the bad field

}  // namespace agentrec

#pragma once

#include "ecofair/dataset.hpp"
#include "ecofair/risk.hpp"
#include "ecofair/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ecofair::fusion {

// Maps metadata to a dense vector: [normalised age, one-hot localization].
// The vocabulary comes from the training fold; the age bounds are reused
// from the fold's RiskModel. Unseen or missing localization maps to an
// all-zero one-hot block, missing age to 0.5.
struct TabularFeaturiser {
    std::vector<std::string> vocabulary; // sorted training-fold localizations
    double a_min = 0.0;
    double a_max = 0.0;

    std::size_t dim() const { return vocabulary.size() + 1; }
    Embedding featurise(const Sample& s) const;
};

TabularFeaturiser fit_featuriser(std::span<const Sample> train_samples, const risk::RiskModel& m);

enum class Pathway { Lite, Heavy, Combined };

const char* to_string(Pathway p);
Pathway pathway_from_string(const std::string& s);

// Linear-softmax map from [image embedding ++ tabular embedding] to a class
// distribution. Weights are row-major C x (image_dim + tab_dim).
struct FusionHead {
    Pathway pathway = Pathway::Lite;
    std::size_t image_dim = 0;
    std::size_t tab_dim = 0;
    std::size_t num_classes = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    // training metadata
    int fold = -1;
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    double learning_rate = 0.0;

    std::size_t input_dim() const { return image_dim + tab_dim; }
    bool operator==(const FusionHead&) const = default;
};

struct TrainConfig {
    std::size_t epochs = 300;
    double learning_rate = 1.0;
    double l2 = 1e-4;
    double init_scale = 0.01;
};

// Mean cross-entropy plus (l2/2)*||W||^2 (bias unregularised), with the
// gradient written into grad_w / grad_b. Exposed so the analytic gradient
// can be checked against finite differences of training_loss.
double training_loss_and_gradient(const FusionHead& head,
                                  const std::vector<std::vector<double>>& inputs,
                                  std::span<const std::size_t> labels, double l2,
                                  std::span<double> grad_w, std::span<double> grad_b);

double training_loss(const FusionHead& head, const std::vector<std::vector<double>>& inputs,
                     std::span<const std::size_t> labels, double l2);

struct TrainResult {
    FusionHead head;
    std::vector<double> loss_per_epoch; // non-increasing by construction
};

// Full-batch gradient descent with step halving whenever a step would
// increase the objective, so the recorded loss sequence is monotone.
// Deterministic under the seed.
TrainResult train_head(Pathway pathway, const std::vector<std::vector<double>>& inputs,
                       std::span<const std::size_t> labels, std::size_t num_classes,
                       const TrainConfig& cfg, std::uint64_t seed, int fold);

// softmax(W [h_img ++ h_tab] + b); the result always passes distribution
// validation. Throws DimensionMismatch on a pathway/width mismatch.
PredictiveDistribution fuse_predict(const Embedding& h_img, const Embedding& h_tab,
                                    const FusionHead& head);

// Per-fold training bundle: lite and heavy heads, an optional combined head
// (alongside transmission), and the shared tabular featuriser.
struct FoldHeads {
    FusionHead lite;
    FusionHead heavy;
    std::optional<FusionHead> combined;
    TabularFeaturiser featuriser;
    std::vector<double> lite_loss;
    std::vector<double> heavy_loss;
};

FoldHeads train_fusion_heads(const Dataset& d, std::span<const std::size_t> train_indices,
                             const std::string& lite_id, const std::string& heavy_id,
                             const risk::RiskModel& risk_model, HeavyTransmission transmission,
                             const TrainConfig& cfg, std::uint64_t seed, int fold);

} // namespace ecofair::fusion

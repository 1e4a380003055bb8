#include "ecofair/fusion.hpp"

#include "ecofair/error.hpp"
#include "ecofair/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ecofair::fusion {

Embedding TabularFeaturiser::featurise(const Sample& s) const {
    std::vector<double> values(dim(), 0.0);
    if (s.age.has_value()) {
        values[0] = a_min == a_max ? 0.5 : std::clamp((*s.age - a_min) / (a_max - a_min), 0.0, 1.0);
    } else {
        values[0] = 0.5;
    }
    if (s.localization.has_value()) {
        auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), *s.localization);
        if (it != vocabulary.end() && *it == s.localization) {
            values[1 + static_cast<std::size_t>(it - vocabulary.begin())] = 1.0;
        }
    }
    return Embedding{std::move(values), "tabular"};
}

TabularFeaturiser fit_featuriser(std::span<const Sample> train_samples,
                                 const risk::RiskModel& m) {
    std::set<std::string> vocab;
    for (const Sample& s : train_samples) {
        if (s.localization.has_value()) vocab.insert(*s.localization);
    }
    TabularFeaturiser f;
    f.vocabulary.assign(vocab.begin(), vocab.end());
    f.a_min = m.a_min;
    f.a_max = m.a_max;
    return f;
}

const char* to_string(Pathway p) {
    switch (p) {
    case Pathway::Lite: return "lite";
    case Pathway::Heavy: return "heavy";
    case Pathway::Combined: return "combined";
    }
    return "lite";
}

Pathway pathway_from_string(const std::string& s) {
    if (s == "lite") return Pathway::Lite;
    if (s == "heavy") return Pathway::Heavy;
    if (s == "combined") return Pathway::Combined;
    raise(ErrorCode::SchemaError, "unknown pathway '" + s + "'");
}

namespace {

void softmax_inplace(std::vector<double>& logits) {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double& v : logits) {
        v = std::exp(v - max_logit);
        denom += v;
    }
    for (double& v : logits) v /= denom;
}

std::vector<double> head_probs(const FusionHead& head, const std::vector<double>& x) {
    std::vector<double> logits(head.num_classes);
    for (std::size_t c = 0; c < head.num_classes; ++c) {
        double z = head.bias[c];
        const double* w = head.weights.data() + c * head.input_dim();
        for (std::size_t i = 0; i < x.size(); ++i) z += w[i] * x[i];
        logits[c] = z;
    }
    softmax_inplace(logits);
    return logits;
}

} // namespace

double training_loss_and_gradient(const FusionHead& head,
                                  const std::vector<std::vector<double>>& inputs,
                                  std::span<const std::size_t> labels, double l2,
                                  std::span<double> grad_w, std::span<double> grad_b) {
    ECOFAIR_REQUIRE(inputs.size() == labels.size(), ErrorCode::LengthMismatch,
                    "inputs and labels differ in length");
    ECOFAIR_REQUIRE(!inputs.empty(), ErrorCode::EmptyInput, "empty training batch");
    ECOFAIR_REQUIRE(grad_w.size() == head.weights.size() && grad_b.size() == head.bias.size(),
                    ErrorCode::DimensionMismatch, "gradient buffers have the wrong shape");

    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(inputs.size());
    const std::size_t dim = head.input_dim();

    double loss = 0.0;
    for (std::size_t n = 0; n < inputs.size(); ++n) {
        const std::vector<double>& x = inputs[n];
        ECOFAIR_REQUIRE(x.size() == dim, ErrorCode::DimensionMismatch,
                        "input row width does not match the head");
        ECOFAIR_REQUIRE(labels[n] < head.num_classes, ErrorCode::OutOfRangeLabel,
                        "training label out of range");
        const std::vector<double> p = head_probs(head, x);
        loss -= std::log(std::max(p[labels[n]], 1e-300)) * inv_n;
        for (std::size_t c = 0; c < head.num_classes; ++c) {
            const double residual = (p[c] - (c == labels[n] ? 1.0 : 0.0)) * inv_n;
            grad_b[c] += residual;
            double* gw = grad_w.data() + c * dim;
            for (std::size_t i = 0; i < dim; ++i) gw[i] += residual * x[i];
        }
    }
    if (l2 > 0.0) {
        double reg = 0.0;
        for (std::size_t i = 0; i < head.weights.size(); ++i) {
            reg += head.weights[i] * head.weights[i];
            grad_w[i] += l2 * head.weights[i];
        }
        loss += 0.5 * l2 * reg;
    }
    return loss;
}

double training_loss(const FusionHead& head, const std::vector<std::vector<double>>& inputs,
                     std::span<const std::size_t> labels, double l2) {
    ECOFAIR_REQUIRE(inputs.size() == labels.size(), ErrorCode::LengthMismatch,
                    "inputs and labels differ in length");
    ECOFAIR_REQUIRE(!inputs.empty(), ErrorCode::EmptyInput, "empty training batch");
    const double inv_n = 1.0 / static_cast<double>(inputs.size());
    double loss = 0.0;
    for (std::size_t n = 0; n < inputs.size(); ++n) {
        const std::vector<double> p = head_probs(head, inputs[n]);
        loss -= std::log(std::max(p[labels[n]], 1e-300)) * inv_n;
    }
    if (l2 > 0.0) {
        double reg = 0.0;
        for (double w : head.weights) reg += w * w;
        loss += 0.5 * l2 * reg;
    }
    return loss;
}

TrainResult train_head(Pathway pathway, const std::vector<std::vector<double>>& inputs,
                       std::span<const std::size_t> labels, std::size_t num_classes,
                       const TrainConfig& cfg, std::uint64_t seed, int fold) {
    ECOFAIR_REQUIRE(!inputs.empty(), ErrorCode::EmptyInput, "empty training set");
    std::set<std::size_t> distinct(labels.begin(), labels.end());
    ECOFAIR_REQUIRE(distinct.size() >= 2, ErrorCode::DegenerateTrainingSet,
                    "training fold has a single class");

    FusionHead head;
    head.pathway = pathway;
    head.tab_dim = 0; // set by the caller when splitting dims matters
    head.image_dim = inputs.front().size();
    head.num_classes = num_classes;
    head.fold = fold;
    head.seed = seed;
    head.epochs = cfg.epochs;
    head.learning_rate = cfg.learning_rate;
    head.weights.resize(num_classes * inputs.front().size());
    head.bias.assign(num_classes, 0.0);

    Rng rng(seed);
    for (double& w : head.weights) w = cfg.init_scale * rng.normal();

    std::vector<double> grad_w(head.weights.size()), grad_b(head.bias.size());
    std::vector<double> trial_w, trial_b;
    double lr = cfg.learning_rate;

    TrainResult result;
    double loss = training_loss_and_gradient(head, inputs, labels, cfg.l2, grad_w, grad_b);
    result.loss_per_epoch.push_back(loss);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        bool accepted = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            trial_w = head.weights;
            trial_b = head.bias;
            for (std::size_t i = 0; i < trial_w.size(); ++i) trial_w[i] -= lr * grad_w[i];
            for (std::size_t i = 0; i < trial_b.size(); ++i) trial_b[i] -= lr * grad_b[i];
            FusionHead trial = head;
            trial.weights = std::move(trial_w);
            trial.bias = std::move(trial_b);
            const double trial_loss = training_loss(trial, inputs, labels, cfg.l2);
            if (trial_loss <= loss) {
                head.weights = std::move(trial.weights);
                head.bias = std::move(trial.bias);
                loss = trial_loss;
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if (!accepted) break; // no descent direction at float resolution
        result.loss_per_epoch.push_back(loss);
        loss = training_loss_and_gradient(head, inputs, labels, cfg.l2, grad_w, grad_b);
    }
    result.head = std::move(head);
    return result;
}

PredictiveDistribution fuse_predict(const Embedding& h_img, const Embedding& h_tab,
                                    const FusionHead& head) {
    ECOFAIR_REQUIRE(h_img.dim() == head.image_dim, ErrorCode::DimensionMismatch,
                    "image embedding width does not match the " + std::string(to_string(head.pathway)) +
                        " head");
    ECOFAIR_REQUIRE(h_tab.dim() == head.tab_dim, ErrorCode::DimensionMismatch,
                    "tabular embedding width does not match the head");
    std::vector<double> x;
    x.reserve(head.input_dim());
    x.insert(x.end(), h_img.values.begin(), h_img.values.end());
    x.insert(x.end(), h_tab.values.begin(), h_tab.values.end());
    return validate_distribution(head_probs(head, x));
}

namespace {

std::vector<std::vector<double>> assemble_inputs(const Dataset& d,
                                                 std::span<const std::size_t> indices,
                                                 const std::vector<const EncoderTable*>& tables,
                                                 const TabularFeaturiser& featuriser) {
    std::vector<std::vector<double>> rows;
    rows.reserve(indices.size());
    for (std::size_t idx : indices) {
        std::vector<double> x;
        for (const EncoderTable* table : tables) {
            const auto& emb = table->embeddings[idx];
            x.insert(x.end(), emb.begin(), emb.end());
        }
        const Embedding tab = featuriser.featurise(d.samples[idx]);
        x.insert(x.end(), tab.values.begin(), tab.values.end());
        rows.push_back(std::move(x));
    }
    return rows;
}

} // namespace

FoldHeads train_fusion_heads(const Dataset& d, std::span<const std::size_t> train_indices,
                             const std::string& lite_id, const std::string& heavy_id,
                             const risk::RiskModel& risk_model, HeavyTransmission transmission,
                             const TrainConfig& cfg, std::uint64_t seed, int fold) {
    ECOFAIR_REQUIRE(!train_indices.empty(), ErrorCode::EmptyInput, "empty training fold");
    const EncoderTable& lite_table = d.table(lite_id);
    const EncoderTable& heavy_table = d.table(heavy_id);
    ECOFAIR_REQUIRE(lite_table.has_embeddings(), ErrorCode::SchemaError,
                    "encoder '" + lite_id + "' has no embeddings");
    ECOFAIR_REQUIRE(heavy_table.has_embeddings(), ErrorCode::SchemaError,
                    "encoder '" + heavy_id + "' has no embeddings");

    std::vector<Sample> train_samples;
    std::vector<std::size_t> labels;
    train_samples.reserve(train_indices.size());
    for (std::size_t idx : train_indices) {
        train_samples.push_back(d.samples[idx]);
        labels.push_back(d.samples[idx].label);
    }

    FoldHeads out;
    out.featuriser = fit_featuriser(train_samples, risk_model);
    const std::size_t num_classes = d.taxonomy.num_classes();
    const std::size_t tab_dim = out.featuriser.dim();

    auto finalise = [&](FusionHead head, std::size_t image_dim) {
        head.image_dim = image_dim;
        head.tab_dim = tab_dim;
        return head;
    };

    const auto lite_inputs = assemble_inputs(d, train_indices, {&lite_table}, out.featuriser);
    TrainResult lite = train_head(Pathway::Lite, lite_inputs, labels, num_classes, cfg,
                                  Rng::derive(seed, 1), fold);
    out.lite = finalise(std::move(lite.head), d.profile(lite_id).embedding_dim);
    out.lite_loss = std::move(lite.loss_per_epoch);

    const auto heavy_inputs = assemble_inputs(d, train_indices, {&heavy_table}, out.featuriser);
    TrainResult heavy = train_head(Pathway::Heavy, heavy_inputs, labels, num_classes, cfg,
                                   Rng::derive(seed, 2), fold);
    out.heavy = finalise(std::move(heavy.head), d.profile(heavy_id).embedding_dim);
    out.heavy_loss = std::move(heavy.loss_per_epoch);

    if (transmission == HeavyTransmission::Alongside) {
        const auto combined_inputs =
            assemble_inputs(d, train_indices, {&lite_table, &heavy_table}, out.featuriser);
        TrainResult combined = train_head(Pathway::Combined, combined_inputs, labels, num_classes,
                                          cfg, Rng::derive(seed, 3), fold);
        out.combined = finalise(std::move(combined.head),
                                d.profile(lite_id).embedding_dim +
                                    d.profile(heavy_id).embedding_dim);
    }
    return out;
}

} // namespace ecofair::fusion

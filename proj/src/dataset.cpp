#include "ecofair/dataset.hpp"

#include "ecofair/error.hpp"
#include "ecofair/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ecofair {

const EncoderProfile& Dataset::profile(const std::string& encoder_id) const {
    for (const EncoderProfile& p : profiles) {
        if (p.encoder_id == encoder_id) return p;
    }
    raise(ErrorCode::SchemaError, "no profile for encoder '" + encoder_id + "'");
}

const EncoderTable& Dataset::table(const std::string& encoder_id) const {
    auto it = encoders.find(encoder_id);
    ECOFAIR_REQUIRE(it != encoders.end(), ErrorCode::SchemaError,
                    "no table for encoder '" + encoder_id + "'");
    return it->second;
}

void Dataset::check() const {
    const std::size_t n = samples.size();
    const std::size_t c = taxonomy.num_classes();
    for (const Sample& s : samples) {
        ECOFAIR_REQUIRE(s.label < c, ErrorCode::UnknownLabel,
                        "sample '" + s.id + "' has an out-of-range label");
        if (s.age.has_value())
            ECOFAIR_REQUIRE(std::isfinite(*s.age) && *s.age >= 0.0, ErrorCode::SchemaError,
                            "sample '" + s.id + "' has an invalid age");
    }
    for (const auto& [id, table] : encoders) {
        const EncoderProfile& p = profile(id); // throws when missing
        if (table.has_probabilities()) {
            ECOFAIR_REQUIRE(table.probabilities.size() == n, ErrorCode::RowCountMismatch,
                            "probability rows for '" + id + "' do not match sample count");
            for (const auto& row : table.probabilities)
                ECOFAIR_REQUIRE(row.size() == c, ErrorCode::LengthMismatch,
                                "probability row width for '" + id + "' does not match class count");
        }
        if (table.has_embeddings()) {
            ECOFAIR_REQUIRE(table.embeddings.size() == n, ErrorCode::RowCountMismatch,
                            "embedding rows for '" + id + "' do not match sample count");
            for (const auto& row : table.embeddings) {
                ECOFAIR_REQUIRE(row.size() == p.embedding_dim, ErrorCode::LengthMismatch,
                                "embedding width for '" + id + "' does not match its profile");
                for (double v : row)
                    ECOFAIR_REQUIRE(std::isfinite(v), ErrorCode::SchemaError,
                                    "non-finite embedding value for '" + id + "'");
            }
        }
    }
}

void validate_synth_spec(const SynthSpec& spec) {
    ECOFAIR_REQUIRE(spec.num_classes >= 2, ErrorCode::InvalidSpec, "need at least 2 classes");
    ECOFAIR_REQUIRE(spec.n_localizations >= 1, ErrorCode::InvalidSpec,
                    "need at least 1 localization");
    ECOFAIR_REQUIRE(spec.n_subgroups >= 1, ErrorCode::InvalidSpec, "need at least 1 subgroup");
    ECOFAIR_REQUIRE(spec.lite_dim >= 1 && spec.heavy_dim >= 1, ErrorCode::InvalidSpec,
                    "embedding dims must be >= 1");
    ECOFAIR_REQUIRE(spec.lite_noise >= 0.0 && spec.heavy_noise >= 0.0, ErrorCode::InvalidSpec,
                    "noise levels must be >= 0");
    ECOFAIR_REQUIRE(spec.heavy_noise <= spec.lite_noise, ErrorCode::InvalidSpec,
                    "heavy_noise must not exceed lite_noise");
    ECOFAIR_REQUIRE(spec.age_lo <= spec.age_hi && spec.age_lo >= 0.0, ErrorCode::InvalidSpec,
                    "age range must satisfy 0 <= age_lo <= age_hi");
    if (!spec.class_prior.empty()) {
        ECOFAIR_REQUIRE(spec.class_prior.size() == spec.num_classes, ErrorCode::InvalidSpec,
                        "class_prior length must equal num_classes");
        double sum = 0.0;
        for (double p : spec.class_prior) {
            ECOFAIR_REQUIRE(p >= 0.0 && std::isfinite(p), ErrorCode::InvalidSpec,
                            "class_prior entries must be >= 0");
            sum += p;
        }
        ECOFAIR_REQUIRE(sum > 0.0, ErrorCode::InvalidSpec, "class_prior must have positive mass");
    }
    if (!spec.lite_noise_per_subgroup.empty()) {
        ECOFAIR_REQUIRE(spec.lite_noise_per_subgroup.size() == spec.n_subgroups,
                        ErrorCode::InvalidSpec,
                        "lite_noise_per_subgroup length must equal n_subgroups");
        for (double s : spec.lite_noise_per_subgroup)
            ECOFAIR_REQUIRE(s >= 0.0 && std::isfinite(s), ErrorCode::InvalidSpec,
                            "per-subgroup noise must be >= 0");
    }
    ECOFAIR_REQUIRE(spec.lite_energy_j >= 0.0 && spec.heavy_energy_j >= 0.0,
                    ErrorCode::InvalidSpec, "encoder energies must be >= 0");
}

namespace {

ClassTaxonomy synth_taxonomy(std::size_t num_classes) {
    ClassTaxonomy t;
    const std::size_t n_safe = (num_classes + 1) / 2;
    for (std::size_t c = 0; c < num_classes; ++c) {
        t.class_names.push_back("class_" + std::to_string(c));
        if (c < n_safe) t.safe_set.push_back(c);
        else t.danger_set.push_back(c);
    }
    t.malignant_set = t.danger_set;
    return validate_taxonomy(std::move(t));
}

std::vector<std::vector<double>> draw_centers(Rng& rng, std::size_t num_classes, std::size_t dim,
                                              double scale) {
    std::vector<std::vector<double>> centers(num_classes, std::vector<double>(dim));
    for (auto& center : centers) {
        double norm2 = 0.0;
        for (double& v : center) {
            v = rng.normal();
            norm2 += v * v;
        }
        const double norm = std::sqrt(std::max(norm2, 1e-12));
        for (double& v : center) v *= scale / norm;
    }
    return centers;
}

std::size_t draw_categorical(Rng& rng, const std::vector<double>& weights) {
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double u = rng.uniform01() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return i;
    }
    return weights.size() - 1;
}

// Likelihood-style softmax over negative squared distances to the class
// centers; the bandwidth floor keeps the rule defined at zero noise.
std::vector<double> softmax_of_similarity(const std::vector<double>& x,
                                          const std::vector<std::vector<double>>& centers,
                                          double sigma) {
    const double bandwidth = std::max(sigma, 0.35);
    std::vector<double> logits(centers.size());
    for (std::size_t c = 0; c < centers.size(); ++c) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double diff = x[i] - centers[c][i];
            d2 += diff * diff;
        }
        logits[c] = -d2 / (2.0 * bandwidth * bandwidth);
    }
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    std::vector<double> probs(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        probs[c] = std::exp(logits[c] - max_logit);
        denom += probs[c];
    }
    for (double& p : probs) p /= denom;
    return probs;
}

} // namespace

Dataset synth_generate(const SynthSpec& spec) {
    validate_synth_spec(spec);
    Rng rng(spec.seed);

    Dataset d;
    d.taxonomy = synth_taxonomy(spec.num_classes);
    d.profiles = {
        {kSynthLiteEncoderId, EncoderTier::Lite, spec.lite_energy_j, spec.lite_latency_ms,
         spec.lite_dim},
        {kSynthHeavyEncoderId, EncoderTier::Heavy, spec.heavy_energy_j, spec.heavy_latency_ms,
         spec.heavy_dim},
    };

    constexpr double kCenterScale = 3.0;
    const auto lite_centers = draw_centers(rng, spec.num_classes, spec.lite_dim, kCenterScale);
    const auto heavy_centers = draw_centers(rng, spec.num_classes, spec.heavy_dim, kCenterScale);

    std::vector<double> prior = spec.class_prior;
    if (prior.empty()) prior.assign(spec.num_classes, 1.0);

    // Site weights skewed in opposite directions for malignant vs. benign
    // labels, which makes per-site malignancy rates non-uniform.
    const std::size_t n_loc = spec.n_localizations;
    std::vector<double> site_weight_malignant(n_loc), site_weight_benign(n_loc);
    for (std::size_t l = 0; l < n_loc; ++l) {
        site_weight_malignant[l] = static_cast<double>((l + 1) * (l + 1));
        site_weight_benign[l] = static_cast<double>((n_loc - l) * (n_loc - l));
    }

    EncoderTable lite_table, heavy_table;
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        Sample s;
        s.id = "synth_" + std::to_string(i);
        s.label = draw_categorical(rng, prior);
        s.age = rng.uniform(spec.age_lo, spec.age_hi);
        const bool malignant = d.taxonomy.is_malignant(s.label);
        const std::size_t site =
            draw_categorical(rng, malignant ? site_weight_malignant : site_weight_benign);
        s.localization = "site_" + std::to_string(site);
        const std::size_t group = rng.uniform_index(spec.n_subgroups);
        s.subgroup = "group_" + std::to_string(group);

        const double lite_sigma = spec.lite_noise_per_subgroup.empty()
                                      ? spec.lite_noise
                                      : spec.lite_noise_per_subgroup[group];
        std::vector<double> lite_emb(spec.lite_dim), heavy_emb(spec.heavy_dim);
        for (std::size_t k = 0; k < spec.lite_dim; ++k)
            lite_emb[k] = lite_centers[s.label][k] + lite_sigma * rng.normal();
        for (std::size_t k = 0; k < spec.heavy_dim; ++k)
            heavy_emb[k] = heavy_centers[s.label][k] + spec.heavy_noise * rng.normal();

        lite_table.probabilities.push_back(
            validate_distribution(softmax_of_similarity(lite_emb, lite_centers, lite_sigma))
                .probs);
        heavy_table.probabilities.push_back(
            validate_distribution(
                softmax_of_similarity(heavy_emb, heavy_centers, spec.heavy_noise))
                .probs);
        lite_table.embeddings.push_back(std::move(lite_emb));
        heavy_table.embeddings.push_back(std::move(heavy_emb));
        d.samples.push_back(std::move(s));
    }

    d.encoders[kSynthLiteEncoderId] = std::move(lite_table);
    d.encoders[kSynthHeavyEncoderId] = std::move(heavy_table);
    d.check();
    return d;
}

Dataset stratified_folds(Dataset d, std::size_t k, std::uint64_t seed, bool strict,
                         std::vector<std::string>* warnings) {
    ECOFAIR_REQUIRE(k >= 2, ErrorCode::InvalidArgument, "fold count must be >= 2");
    Rng rng(Rng::derive(seed, 0xf01d5ULL));

    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < d.samples.size(); ++i) by_class[d.samples[i].label].push_back(i);

    for (auto& [label, indices] : by_class) {
        if (indices.size() < k) {
            const std::string name = label < d.taxonomy.class_names.size()
                                         ? d.taxonomy.class_names[label]
                                         : std::to_string(label);
            ECOFAIR_REQUIRE(!strict, ErrorCode::TooFewSamples,
                            "class '" + name + "' has " + std::to_string(indices.size()) +
                                " samples for " + std::to_string(k) + " folds");
            if (warnings)
                warnings->push_back("class '" + name + "' has fewer samples than folds; " +
                                    "its members are spread over distinct folds");
        }
        // Fisher-Yates shuffle, then round-robin from a random per-class
        // offset so extras do not always land in the low folds.
        for (std::size_t i = indices.size(); i > 1; --i) {
            std::swap(indices[i - 1], indices[rng.uniform_index(i)]);
        }
        const std::size_t offset = rng.uniform_index(k);
        for (std::size_t j = 0; j < indices.size(); ++j) {
            d.samples[indices[j]].fold = static_cast<int>((j + offset) % k);
        }
    }
    return d;
}

} // namespace ecofair

#pragma once

#include "ecofair/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ecofair {

// Per-encoder matrices, one row per sample, aligned with Dataset::samples.
// Either table may be absent (empty).
struct EncoderTable {
    std::vector<std::vector<double>> probabilities; // N x C
    std::vector<std::vector<double>> embeddings;    // N x dim

    bool has_probabilities() const { return !probabilities.empty(); }
    bool has_embeddings() const { return !embeddings.empty(); }
};

// Uniform container for one benchmark export: metadata rows plus per-encoder
// probability/embedding matrices and the encoder cost profiles.
struct Dataset {
    ClassTaxonomy taxonomy;
    std::vector<Sample> samples;
    std::map<std::string, EncoderTable> encoders;
    std::vector<EncoderProfile> profiles;

    std::size_t size() const { return samples.size(); }
    const EncoderProfile& profile(const std::string& encoder_id) const;
    const EncoderTable& table(const std::string& encoder_id) const;

    // Row alignment, profile coverage, dimension consistency, label ranges.
    void check() const;
};

// Deterministic synthetic dataset: class-conditional embeddings around
// separated per-class centers, per-tier noise (heavy strictly cleaner),
// probabilities from a fixed softmax-of-similarity rule over those
// embeddings, uniform ages, and site-dependent malignancy rates that are
// non-uniform by construction.
struct SynthSpec {
    std::uint64_t seed = 1;
    std::size_t n_samples = 1000;
    std::size_t num_classes = 7;
    std::size_t n_localizations = 6;
    std::size_t n_subgroups = 2;
    std::vector<double> class_prior;             // empty = uniform
    double lite_noise = 1.0;
    double heavy_noise = 0.25;
    std::vector<double> lite_noise_per_subgroup; // empty = lite_noise for every subgroup
    double age_lo = 20.0;
    double age_hi = 90.0;
    std::size_t lite_dim = 16;
    std::size_t heavy_dim = 24;
    // Cost profile attached to the generated encoders.
    double lite_energy_j = 0.18;
    double heavy_energy_j = 0.84;
    double lite_latency_ms = 130.0;
    double heavy_latency_ms = 680.0;
};

inline constexpr const char* kSynthLiteEncoderId = "synth_lite";
inline constexpr const char* kSynthHeavyEncoderId = "synth_heavy";

void validate_synth_spec(const SynthSpec& spec);

// Pure function of its argument; identical specs produce identical datasets.
Dataset synth_generate(const SynthSpec& spec);

// Assigns every sample a fold in [0, k) stratified by class label: per-class
// fold counts differ by at most one, deterministic under the seed. Classes
// with fewer than k members are spread over distinct folds after a warning
// (strict = true turns that case into a TooFewSamples error). Warnings are
// appended to *warnings when provided.
Dataset stratified_folds(Dataset d, std::size_t k, std::uint64_t seed, bool strict = false,
                         std::vector<std::string>* warnings = nullptr);

} // namespace ecofair

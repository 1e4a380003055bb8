#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ecofair {

// Partition of the label space into clinically lower-risk (safe) and
// higher-risk (danger) classes, plus the subset used for malignant-case
// recall and subgroup TPR metrics. Index sets are kept sorted and unique.
struct ClassTaxonomy {
    std::vector<std::string> class_names;
    std::vector<std::size_t> safe_set;
    std::vector<std::size_t> danger_set;
    std::vector<std::size_t> malignant_set;

    std::size_t num_classes() const { return class_names.size(); }
    bool is_safe(std::size_t c) const;
    bool is_danger(std::size_t c) const;
    bool is_malignant(std::size_t c) const;
    std::optional<std::size_t> index_of(const std::string& name) const;
};

// Checks: safe/danger disjoint, their union covers all classes, malignant
// non-empty and contained in danger, at least two classes. Returns the
// taxonomy with index sets sorted and deduplicated.
ClassTaxonomy validate_taxonomy(ClassTaxonomy t);

// One patient case. Metadata cells may be missing; downstream modules decide
// how missing values are treated.
struct Sample {
    std::string id;
    std::size_t label = 0;
    std::optional<double> age;
    std::optional<std::string> localization;
    std::optional<std::string> subgroup;
    std::optional<int> fold;
};

struct PredictiveDistribution {
    std::vector<double> probs;

    std::size_t num_classes() const { return probs.size(); }
};

// Rejects negative entries first, then entries > 1, then |sum - 1| > 1e-6.
// Vectors whose sum is within tolerance but not exactly representable as 1
// are renormalised by a single division; the function is idempotent.
PredictiveDistribution validate_distribution(std::vector<double> probs);

struct Embedding {
    std::vector<double> values;
    std::string encoder_id;

    std::size_t dim() const { return values.size(); }
};

enum class EncoderTier { Lite, Heavy, Tabular };

const char* to_string(EncoderTier tier);
EncoderTier tier_from_string(const std::string& s);

// Fixed per-encoder cost profile. Energy and latency are consumed as inputs,
// never measured by this library.
struct EncoderProfile {
    std::string encoder_id;
    EncoderTier tier = EncoderTier::Lite;
    double energy_per_sample_j = 0.0;
    double latency_ms = 0.0; // informational
    std::size_t embedding_dim = 1;
};

void validate_profile(const EncoderProfile& p);

enum class GateMode { Score, Trigger };
enum class HeavyTransmission { Replace, Alongside };

const char* to_string(GateMode m);
GateMode gate_mode_from_string(const std::string& s);
const char* to_string(HeavyTransmission t);
HeavyTransmission transmission_from_string(const std::string& s);

struct RoutingConfig {
    GateMode gate_mode = GateMode::Trigger;
    double lambda_h = 0.5;
    double lambda_delta = 0.5;
    double tau_r = 0.5;
    double tau_h = 0.5;
    double tau_delta = 0.8;
    double tau_risk = 0.6;
    HeavyTransmission heavy_transmission = HeavyTransmission::Replace;
};

// All thresholds finite; in score mode lambda_h + lambda_delta must be > 0.
void validate_routing_config(const RoutingConfig& cfg);

// Which gate clauses fired. Serialised order is fixed:
// entropy, ambiguity, score, risk_override.
struct TriggerReasons {
    bool entropy = false;
    bool ambiguity = false;
    bool score = false;
    bool risk_override = false;

    bool any() const { return entropy || ambiguity || score || risk_override; }
    std::string label() const;
};

TriggerReasons trigger_reasons_from_label(const std::string& label);

// Gate bit plus a snapshot of every signal that produced it, so each decision
// can be audited against a recomputation from the stored distribution.
struct RouteDecision {
    std::string sample_id;
    bool gate = false;
    double entropy = 0.0;
    double norm_entropy = 0.0;
    double delta = 0.0;
    double ambiguity = 0.0;
    std::optional<double> score; // populated in score mode only
    double tab_risk = 0.0;
    TriggerReasons trigger_reason;
};

} // namespace ecofair

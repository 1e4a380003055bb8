#include "ecofair/types.hpp"

#include "ecofair/error.hpp"

#include <algorithm>
#include <cmath>

namespace ecofair {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::OverlapError: return "OverlapError";
    case ErrorCode::CoverageError: return "CoverageError";
    case ErrorCode::EmptyMalignant: return "EmptyMalignant";
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::NormalizationError: return "NormalizationError";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::RowCountMismatch: return "RowCountMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::NoAgeData: return "NoAgeData";
    case ErrorCode::NoMalignantCases: return "NoMalignantCases";
    case ErrorCode::DegenerateTrainingSet: return "DegenerateTrainingSet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyDecisions: return "EmptyDecisions";
    case ErrorCode::ZeroHeavyEnergy: return "ZeroHeavyEnergy";
    case ErrorCode::OutOfRangeLabel: return "OutOfRangeLabel";
    case ErrorCode::NoMalignantSamples: return "NoMalignantSamples";
    case ErrorCode::NoEvaluableSubgroup: return "NoEvaluableSubgroup";
    case ErrorCode::SubgroupMismatch: return "SubgroupMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

namespace {

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

bool contains(const std::vector<std::size_t>& sorted, std::size_t c) {
    return std::binary_search(sorted.begin(), sorted.end(), c);
}

} // namespace

bool ClassTaxonomy::is_safe(std::size_t c) const { return contains(safe_set, c); }
bool ClassTaxonomy::is_danger(std::size_t c) const { return contains(danger_set, c); }
bool ClassTaxonomy::is_malignant(std::size_t c) const { return contains(malignant_set, c); }

std::optional<std::size_t> ClassTaxonomy::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < class_names.size(); ++i) {
        if (class_names[i] == name) return i;
    }
    return std::nullopt;
}

ClassTaxonomy validate_taxonomy(ClassTaxonomy t) {
    const std::size_t c = t.class_names.size();
    ECOFAIR_REQUIRE(c >= 2, ErrorCode::InvalidArgument, "taxonomy needs at least 2 classes");
    t.safe_set = sorted_unique(std::move(t.safe_set));
    t.danger_set = sorted_unique(std::move(t.danger_set));
    t.malignant_set = sorted_unique(std::move(t.malignant_set));

    for (std::size_t idx : t.safe_set)
        ECOFAIR_REQUIRE(idx < c, ErrorCode::CoverageError, "safe_set index out of range");
    for (std::size_t idx : t.danger_set)
        ECOFAIR_REQUIRE(idx < c, ErrorCode::CoverageError, "danger_set index out of range");
    for (std::size_t idx : t.safe_set) {
        ECOFAIR_REQUIRE(!contains(t.danger_set, idx), ErrorCode::OverlapError,
                        "class '" + t.class_names[idx] + "' is in both safe_set and danger_set");
    }
    ECOFAIR_REQUIRE(t.safe_set.size() + t.danger_set.size() == c, ErrorCode::CoverageError,
                    "safe_set and danger_set must cover every class exactly once");
    ECOFAIR_REQUIRE(!t.malignant_set.empty(), ErrorCode::EmptyMalignant,
                    "malignant_set must be non-empty");
    for (std::size_t idx : t.malignant_set) {
        ECOFAIR_REQUIRE(idx < c && contains(t.danger_set, idx), ErrorCode::EmptyMalignant,
                        "malignant_set must be a subset of danger_set");
    }
    return t;
}

PredictiveDistribution validate_distribution(std::vector<double> probs) {
    ECOFAIR_REQUIRE(!probs.empty(), ErrorCode::LengthMismatch, "empty probability vector");
    // the sign check runs over the whole vector before any magnitude check
    for (double p : probs) {
        ECOFAIR_REQUIRE(std::isfinite(p), ErrorCode::InvalidArgument,
                        "probability entries must be finite");
        ECOFAIR_REQUIRE(p >= 0.0, ErrorCode::NegativeProbability,
                        "probability entries must be non-negative");
    }
    for (double p : probs) {
        ECOFAIR_REQUIRE(p <= 1.0, ErrorCode::NormalizationError,
                        "probability entries must be at most 1");
    }
    double sum = 0.0;
    for (double p : probs) sum += p;
    ECOFAIR_REQUIRE(std::fabs(sum - 1.0) <= 1e-6, ErrorCode::NormalizationError,
                    "probabilities must sum to 1 within 1e-6");
    // A vector already summing to 1 at float resolution passes through
    // unchanged, which makes validation idempotent.
    if (std::fabs(sum - 1.0) > 1e-12) {
        for (double& p : probs) p /= sum;
    }
    return PredictiveDistribution{std::move(probs)};
}

const char* to_string(EncoderTier tier) {
    switch (tier) {
    case EncoderTier::Lite: return "lite";
    case EncoderTier::Heavy: return "heavy";
    case EncoderTier::Tabular: return "tabular";
    }
    return "lite";
}

EncoderTier tier_from_string(const std::string& s) {
    if (s == "lite") return EncoderTier::Lite;
    if (s == "heavy") return EncoderTier::Heavy;
    if (s == "tabular") return EncoderTier::Tabular;
    raise(ErrorCode::SchemaError, "unknown encoder tier '" + s + "'");
}

void validate_profile(const EncoderProfile& p) {
    ECOFAIR_REQUIRE(!p.encoder_id.empty(), ErrorCode::SchemaError, "encoder_id must be non-empty");
    ECOFAIR_REQUIRE(std::isfinite(p.energy_per_sample_j) && p.energy_per_sample_j >= 0.0,
                    ErrorCode::SchemaError, "energy_per_sample_j must be finite and >= 0");
    ECOFAIR_REQUIRE(std::isfinite(p.latency_ms) && p.latency_ms >= 0.0, ErrorCode::SchemaError,
                    "latency_ms must be finite and >= 0");
    ECOFAIR_REQUIRE(p.embedding_dim >= 1, ErrorCode::SchemaError, "embedding_dim must be >= 1");
}

const char* to_string(GateMode m) { return m == GateMode::Score ? "score" : "trigger"; }

GateMode gate_mode_from_string(const std::string& s) {
    if (s == "score") return GateMode::Score;
    if (s == "trigger") return GateMode::Trigger;
    raise(ErrorCode::SchemaError, "unknown gate_mode '" + s + "'");
}

const char* to_string(HeavyTransmission t) {
    return t == HeavyTransmission::Replace ? "replace" : "alongside";
}

HeavyTransmission transmission_from_string(const std::string& s) {
    if (s == "replace") return HeavyTransmission::Replace;
    if (s == "alongside") return HeavyTransmission::Alongside;
    raise(ErrorCode::SchemaError, "unknown heavy_transmission '" + s + "'");
}

void validate_routing_config(const RoutingConfig& cfg) {
    const double values[] = {cfg.lambda_h, cfg.lambda_delta, cfg.tau_r,
                             cfg.tau_h,    cfg.tau_delta,    cfg.tau_risk};
    for (double v : values)
        ECOFAIR_REQUIRE(std::isfinite(v), ErrorCode::InvalidArgument,
                        "routing config values must be finite");
    ECOFAIR_REQUIRE(cfg.lambda_h >= 0.0 && cfg.lambda_delta >= 0.0, ErrorCode::InvalidArgument,
                    "lambda weights must be >= 0");
    if (cfg.gate_mode == GateMode::Score) {
        ECOFAIR_REQUIRE(cfg.lambda_h + cfg.lambda_delta > 0.0, ErrorCode::InvalidArgument,
                        "score mode requires lambda_h + lambda_delta > 0");
    }
}

std::string TriggerReasons::label() const {
    std::string out;
    auto append = [&out](const char* name) {
        if (!out.empty()) out += '|';
        out += name;
    };
    if (entropy) append("entropy");
    if (ambiguity) append("ambiguity");
    if (score) append("score");
    if (risk_override) append("risk_override");
    return out;
}

TriggerReasons trigger_reasons_from_label(const std::string& label) {
    TriggerReasons r;
    std::size_t start = 0;
    while (start <= label.size() && !label.empty()) {
        std::size_t end = label.find('|', start);
        if (end == std::string::npos) end = label.size();
        const std::string part = label.substr(start, end - start);
        if (part == "entropy") r.entropy = true;
        else if (part == "ambiguity") r.ambiguity = true;
        else if (part == "score") r.score = true;
        else if (part == "risk_override") r.risk_override = true;
        else raise(ErrorCode::SchemaError, "unknown trigger reason '" + part + "'");
        if (end == label.size()) break;
        start = end + 1;
    }
    return r;
}

} // namespace ecofair

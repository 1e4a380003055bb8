#pragma once

#include "ecofair/risk.hpp"
#include "ecofair/types.hpp"

namespace ecofair::routing {

// Shannon entropy in nats, with the 0*log(0) = 0 convention.
double entropy(const PredictiveDistribution& p);

// entropy / ln(C), in [0,1]. Requires C >= 2.
double norm_entropy(const PredictiveDistribution& p);

struct SafeDangerGap {
    double p_safe = 0.0;
    double p_danger = 0.0;
    double delta = 0.0; // p_safe - p_danger, in [-1, 1]
};

SafeDangerGap safe_danger_gap(const PredictiveDistribution& p, const ClassTaxonomy& t);

// 1 - |delta|: near 1 when predicted mass cannot separate safe from danger.
double ambiguity(double delta);

// lambda_h * norm_entropy + lambda_delta * ambiguity.
double routing_score(double norm_entropy, double ambiguity, const RoutingConfig& cfg);

struct RoutingSignals {
    double entropy = 0.0;
    double norm_entropy = 0.0;
    double delta = 0.0;
    double ambiguity = 0.0;
    double tab_risk = 0.0;
};

RoutingSignals compute_signals(const PredictiveDistribution& p_lite, const ClassTaxonomy& t,
                               double tab_risk);

// Applies the gate to precomputed signals.
//   score mode:   G = 1 iff score > tau_r            or tab_risk >= tau_risk
//   trigger mode: G = 1 iff norm_entropy > tau_h     or
//                           ambiguity > tau_delta    or tab_risk >= tau_risk
// Uncertainty/ambiguity/score comparisons are strict; the risk override is
// inclusive. trigger_reason records every clause that fired, and the gate is
// set iff at least one did.
RouteDecision gate(const std::string& sample_id, const RoutingSignals& s,
                   const RoutingConfig& cfg);

// Single entry point used by the evaluation harness: computes the tabular
// risk and all image-side signals for one sample, then gates. Guarantees the
// recorded signals and the decision come from the same inputs.
RouteDecision route_sample(const Sample& s, const PredictiveDistribution& p_lite,
                           const risk::RiskModel& m, const ClassTaxonomy& t,
                           const RoutingConfig& cfg);

} // namespace ecofair::routing

#include "ecofair/routing.hpp"

#include "ecofair/error.hpp"

#include <cmath>

namespace ecofair::routing {

double entropy(const PredictiveDistribution& p) {
    double h = 0.0;
    for (double v : p.probs) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h < 0.0 ? 0.0 : h;
}

double norm_entropy(const PredictiveDistribution& p) {
    const std::size_t c = p.num_classes();
    ECOFAIR_REQUIRE(c >= 2, ErrorCode::InvalidArgument,
                    "normalised entropy requires at least 2 classes");
    return entropy(p) / std::log(static_cast<double>(c));
}

SafeDangerGap safe_danger_gap(const PredictiveDistribution& p, const ClassTaxonomy& t) {
    ECOFAIR_REQUIRE(p.num_classes() == t.num_classes(), ErrorCode::LengthMismatch,
                    "distribution length does not match taxonomy class count");
    SafeDangerGap g;
    for (std::size_t c : t.safe_set) g.p_safe += p.probs[c];
    for (std::size_t c : t.danger_set) g.p_danger += p.probs[c];
    g.delta = g.p_safe - g.p_danger;
    return g;
}

double ambiguity(double delta) { return 1.0 - std::fabs(delta); }

double routing_score(double norm_entropy, double ambiguity, const RoutingConfig& cfg) {
    return cfg.lambda_h * norm_entropy + cfg.lambda_delta * ambiguity;
}

RoutingSignals compute_signals(const PredictiveDistribution& p_lite, const ClassTaxonomy& t,
                               double tab_risk) {
    RoutingSignals s;
    s.entropy = entropy(p_lite);
    s.norm_entropy = norm_entropy(p_lite);
    const SafeDangerGap g = safe_danger_gap(p_lite, t);
    s.delta = g.delta;
    s.ambiguity = ambiguity(g.delta);
    s.tab_risk = tab_risk;
    return s;
}

RouteDecision gate(const std::string& sample_id, const RoutingSignals& s,
                   const RoutingConfig& cfg) {
    validate_routing_config(cfg);
    RouteDecision d;
    d.sample_id = sample_id;
    d.entropy = s.entropy;
    d.norm_entropy = s.norm_entropy;
    d.delta = s.delta;
    d.ambiguity = s.ambiguity;
    d.tab_risk = s.tab_risk;

    if (cfg.gate_mode == GateMode::Score) {
        const double r = routing_score(s.norm_entropy, s.ambiguity, cfg);
        d.score = r;
        d.trigger_reason.score = r > cfg.tau_r;
    } else {
        d.trigger_reason.entropy = s.norm_entropy > cfg.tau_h;
        d.trigger_reason.ambiguity = s.ambiguity > cfg.tau_delta;
    }
    d.trigger_reason.risk_override = risk::risk_override(s.tab_risk, cfg.tau_risk);
    d.gate = d.trigger_reason.any();
    return d;
}

RouteDecision route_sample(const Sample& s, const PredictiveDistribution& p_lite,
                           const risk::RiskModel& m, const ClassTaxonomy& t,
                           const RoutingConfig& cfg) {
    return gate(s.id, compute_signals(p_lite, t, risk::tab_risk(s, m)), cfg);
}

} // namespace ecofair::routing

#pragma once

#include "ecofair/metrics.hpp"
#include "ecofair/types.hpp"

#include <span>
#include <vector>

namespace ecofair::energy {

// Image-pathway energy accounting for one decision set. The lite encoder
// always runs; escalated samples additionally pay the heavy cost:
//   e_ecofair = e_lite + routing_pct * e_heavy
struct EnergyAccount {
    double e_lite = 0.0;
    double e_heavy = 0.0;
    double e_ecofair = 0.0;
    double routing_pct = 0.0;      // fraction of gated samples, in [0,1]
    double savings_vs_heavy = 0.0; // (e_heavy - e_ecofair) / e_heavy
    double savings_vs_lite = 0.0;  // (e_lite - e_ecofair) / e_lite; <= 0
};

// Core accounting identity on a known routing rate.
EnergyAccount account_from_rate(double e_lite_j, double e_heavy_j, double routing_rate);

// Counts gated decisions to obtain the routing rate, then applies the
// identity. Throws EmptyDecisions / ZeroHeavyEnergy.
EnergyAccount account(std::span<const RouteDecision> decisions, const EncoderProfile& lite,
                      const EncoderProfile& heavy);

// Routing rate above which escalation erases the advantage over heavy-only
// inference: r* = 1 - e_lite/e_heavy, clamped to [0,1].
double breakeven_rate(double e_lite_j, double e_heavy_j);
double breakeven_rate(const EncoderProfile& lite, const EncoderProfile& heavy);

// Per-fold accounts plus cross-fold aggregates and the pooled account over
// all decisions.
struct EnergyReport {
    EnergyAccount pooled;
    std::vector<EnergyAccount> per_fold;
    metrics::MeanStd e_ecofair;
    metrics::MeanStd routing_pct;
    metrics::MeanStd savings_vs_heavy;
};

EnergyReport account_per_fold(const std::vector<std::vector<RouteDecision>>& fold_decisions,
                              const EncoderProfile& lite, const EncoderProfile& heavy);

} // namespace ecofair::energy

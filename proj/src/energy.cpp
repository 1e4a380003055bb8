#include "ecofair/energy.hpp"

#include "ecofair/error.hpp"

#include <algorithm>
#include <cmath>

namespace ecofair::energy {

EnergyAccount account_from_rate(double e_lite_j, double e_heavy_j, double routing_rate) {
    ECOFAIR_REQUIRE(std::isfinite(e_lite_j) && e_lite_j >= 0.0, ErrorCode::InvalidArgument,
                    "e_lite must be finite and >= 0");
    ECOFAIR_REQUIRE(std::isfinite(e_heavy_j) && e_heavy_j >= 0.0, ErrorCode::InvalidArgument,
                    "e_heavy must be finite and >= 0");
    ECOFAIR_REQUIRE(e_heavy_j > 0.0, ErrorCode::ZeroHeavyEnergy,
                    "savings vs. heavy are undefined for e_heavy = 0");
    ECOFAIR_REQUIRE(routing_rate >= 0.0 && routing_rate <= 1.0, ErrorCode::InvalidArgument,
                    "routing rate must be in [0,1]");
    EnergyAccount a;
    a.e_lite = e_lite_j;
    a.e_heavy = e_heavy_j;
    a.routing_pct = routing_rate;
    a.e_ecofair = e_lite_j + routing_rate * e_heavy_j;
    a.savings_vs_heavy = (e_heavy_j - a.e_ecofair) / e_heavy_j;
    a.savings_vs_lite = e_lite_j > 0.0 ? (e_lite_j - a.e_ecofair) / e_lite_j : 0.0;
    return a;
}

namespace {

double routing_rate_of(std::span<const RouteDecision> decisions) {
    ECOFAIR_REQUIRE(!decisions.empty(), ErrorCode::EmptyDecisions,
                    "cannot account an empty decision list");
    std::size_t gated = 0;
    for (const RouteDecision& d : decisions) {
        if (d.gate) ++gated;
    }
    return static_cast<double>(gated) / static_cast<double>(decisions.size());
}

} // namespace

EnergyAccount account(std::span<const RouteDecision> decisions, const EncoderProfile& lite,
                      const EncoderProfile& heavy) {
    return account_from_rate(lite.energy_per_sample_j, heavy.energy_per_sample_j,
                             routing_rate_of(decisions));
}

double breakeven_rate(double e_lite_j, double e_heavy_j) {
    ECOFAIR_REQUIRE(std::isfinite(e_heavy_j) && e_heavy_j > 0.0, ErrorCode::ZeroHeavyEnergy,
                    "break-even rate is undefined for e_heavy = 0");
    ECOFAIR_REQUIRE(std::isfinite(e_lite_j) && e_lite_j >= 0.0, ErrorCode::InvalidArgument,
                    "e_lite must be finite and >= 0");
    return std::clamp(1.0 - e_lite_j / e_heavy_j, 0.0, 1.0);
}

double breakeven_rate(const EncoderProfile& lite, const EncoderProfile& heavy) {
    return breakeven_rate(lite.energy_per_sample_j, heavy.energy_per_sample_j);
}

EnergyReport account_per_fold(const std::vector<std::vector<RouteDecision>>& fold_decisions,
                              const EncoderProfile& lite, const EncoderProfile& heavy) {
    ECOFAIR_REQUIRE(!fold_decisions.empty(), ErrorCode::EmptyDecisions, "no folds to account");
    EnergyReport report;
    std::vector<RouteDecision> pooled;
    std::vector<double> e_eco, pct, savings;
    for (const auto& decisions : fold_decisions) {
        report.per_fold.push_back(account(decisions, lite, heavy));
        e_eco.push_back(report.per_fold.back().e_ecofair);
        pct.push_back(report.per_fold.back().routing_pct);
        savings.push_back(report.per_fold.back().savings_vs_heavy);
        pooled.insert(pooled.end(), decisions.begin(), decisions.end());
    }
    report.pooled = account(pooled, lite, heavy);
    report.e_ecofair = metrics::aggregate_folds(e_eco);
    report.routing_pct = metrics::aggregate_folds(pct);
    report.savings_vs_heavy = metrics::aggregate_folds(savings);
    return report;
}

} // namespace ecofair::energy

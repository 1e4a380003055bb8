#pragma once

#include "ecofair/types.hpp"

#include <map>
#include <span>
#include <string>

namespace ecofair::risk {

// Metadata-derived priors calibrated from training-fold rows only. The whole
// model is deliberately inspectable: two age bounds and one empirical
// malignancy rate per anatomical site.
struct RiskModel {
    double a_min = 0.0;
    double a_max = 0.0;
    std::map<std::string, double> mal_rate;
    double max_rate = 0.0;
    double fallback_rate = 0.0;        // used for unseen or missing localization
    double fallback_age_score = 0.5;   // used for missing age

    bool operator==(const RiskModel&) const = default;
};

// a_min/a_max from observed ages; mal_rate(l) = malignant fraction among
// training rows at site l (rows with known localization only);
// fallback_rate = malignant fraction of the whole training fold.
// Throws NoAgeData when no row has an age, NoMalignantCases when the
// maximum site rate would be zero.
RiskModel calibrate(std::span<const Sample> train_samples, const ClassTaxonomy& taxonomy);

// Linear age normalisation clamped to [0,1]. Missing age maps to
// fallback_age_score; a degenerate a_min == a_max model returns 0.5.
double age_score(const std::optional<double>& age, const RiskModel& m);

// mal_rate(loc) / max_rate. Unseen or missing localization maps to
// fallback_rate / max_rate, clamped to [0,1].
double loc_score(const std::optional<std::string>& localization, const RiskModel& m);

// Product of age and localization scores, in [0,1] for every input.
double tab_risk(const Sample& s, const RiskModel& m);

// Inclusive threshold: true iff r_tab >= tau_risk.
bool risk_override(double r_tab, double tau_risk);

} // namespace ecofair::risk

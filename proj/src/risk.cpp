#include "ecofair/risk.hpp"

#include "ecofair/error.hpp"

#include <algorithm>
#include <cmath>

namespace ecofair::risk {

RiskModel calibrate(std::span<const Sample> train_samples, const ClassTaxonomy& taxonomy) {
    ECOFAIR_REQUIRE(!train_samples.empty(), ErrorCode::EmptyInput,
                    "risk calibration requires a non-empty training fold");

    RiskModel m;
    bool any_age = false;
    std::size_t malignant_total = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> site_counts; // site -> (malignant, total)

    for (const Sample& s : train_samples) {
        const bool malignant = taxonomy.is_malignant(s.label);
        if (malignant) ++malignant_total;
        if (s.age.has_value()) {
            if (!any_age) {
                m.a_min = m.a_max = *s.age;
                any_age = true;
            } else {
                m.a_min = std::min(m.a_min, *s.age);
                m.a_max = std::max(m.a_max, *s.age);
            }
        }
        if (s.localization.has_value()) {
            auto& counts = site_counts[*s.localization];
            counts.second += 1;
            if (malignant) counts.first += 1;
        }
    }

    ECOFAIR_REQUIRE(any_age, ErrorCode::NoAgeData, "no training sample has an age");

    for (const auto& [site, counts] : site_counts) {
        m.mal_rate[site] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    }
    m.max_rate = 0.0;
    for (const auto& [site, rate] : m.mal_rate) m.max_rate = std::max(m.max_rate, rate);
    ECOFAIR_REQUIRE(m.max_rate > 0.0, ErrorCode::NoMalignantCases,
                    "no localization has a malignant member; the site score is undefined");

    m.fallback_rate =
        static_cast<double>(malignant_total) / static_cast<double>(train_samples.size());
    m.fallback_age_score = 0.5;
    return m;
}

double age_score(const std::optional<double>& age, const RiskModel& m) {
    if (!age.has_value()) return m.fallback_age_score;
    if (m.a_min == m.a_max) return 0.5;
    const double a = (*age - m.a_min) / (m.a_max - m.a_min);
    return std::clamp(a, 0.0, 1.0);
}

double loc_score(const std::optional<std::string>& localization, const RiskModel& m) {
    double rate = m.fallback_rate;
    if (localization.has_value()) {
        auto it = m.mal_rate.find(*localization);
        if (it != m.mal_rate.end()) rate = it->second;
    }
    return std::clamp(rate / m.max_rate, 0.0, 1.0);
}

double tab_risk(const Sample& s, const RiskModel& m) {
    return age_score(s.age, m) * loc_score(s.localization, m);
}

bool risk_override(double r_tab, double tau_risk) { return r_tab >= tau_risk; }

} // namespace ecofair::risk

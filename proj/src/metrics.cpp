#include "ecofair/metrics.hpp"

#include "ecofair/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ecofair::metrics {

std::size_t argmax_class(std::span<const double> values) {
    ECOFAIR_REQUIRE(!values.empty(), ErrorCode::EmptyInput, "argmax of empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

Confusion confusion(std::span<const std::size_t> labels, std::span<const std::size_t> predictions,
                    std::size_t num_classes) {
    ECOFAIR_REQUIRE(labels.size() == predictions.size(), ErrorCode::LengthMismatch,
                    "labels and predictions differ in length");
    Confusion m(num_classes, std::vector<std::size_t>(num_classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ECOFAIR_REQUIRE(labels[i] < num_classes, ErrorCode::OutOfRangeLabel,
                        "label out of range at row " + std::to_string(i));
        ECOFAIR_REQUIRE(predictions[i] < num_classes, ErrorCode::OutOfRangeLabel,
                        "prediction out of range at row " + std::to_string(i));
        ++m[labels[i]][predictions[i]];
    }
    return m;
}

double macro_f1(const Confusion& m) {
    const std::size_t c = m.size();
    ECOFAIR_REQUIRE(c > 0, ErrorCode::EmptyInput, "empty confusion matrix");
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t tp = m[k][k];
        std::size_t row = 0, col = 0;
        for (std::size_t j = 0; j < c; ++j) {
            row += m[k][j];
            col += m[j][k];
        }
        const double precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        const double recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
        if (precision + recall > 0.0) sum += 2.0 * precision * recall / (precision + recall);
    }
    return sum / static_cast<double>(c);
}

double balanced_accuracy(const Confusion& m) {
    ECOFAIR_REQUIRE(!m.empty(), ErrorCode::EmptyInput, "empty confusion matrix");
    double sum = 0.0;
    std::size_t included = 0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        std::size_t row = 0;
        for (std::size_t j = 0; j < m.size(); ++j) row += m[k][j];
        if (row == 0) continue; // class never observed; excluded from the mean
        sum += static_cast<double>(m[k][k]) / static_cast<double>(row);
        ++included;
    }
    ECOFAIR_REQUIRE(included > 0, ErrorCode::EmptyInput, "no class has a true instance");
    return sum / static_cast<double>(included);
}

double malignant_recall(std::span<const std::size_t> labels,
                        std::span<const std::size_t> predictions, const ClassTaxonomy& taxonomy) {
    ECOFAIR_REQUIRE(labels.size() == predictions.size(), ErrorCode::LengthMismatch,
                    "labels and predictions differ in length");
    std::size_t positives = 0, recalled = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!taxonomy.is_malignant(labels[i])) continue;
        ++positives;
        if (taxonomy.is_malignant(predictions[i])) ++recalled;
    }
    ECOFAIR_REQUIRE(positives > 0, ErrorCode::NoMalignantSamples,
                    "no sample carries a malignant label");
    return static_cast<double>(recalled) / static_cast<double>(positives);
}

FairnessReport fairness(std::span<const std::size_t> labels,
                        std::span<const std::size_t> predictions,
                        std::span<const std::optional<std::string>> subgroups,
                        const ClassTaxonomy& taxonomy) {
    ECOFAIR_REQUIRE(labels.size() == predictions.size() && labels.size() == subgroups.size(),
                    ErrorCode::LengthMismatch, "fairness inputs differ in length");

    struct Counts {
        std::size_t total = 0;
        std::size_t positives = 0;
        std::size_t recalled = 0;
    };
    std::map<std::string, Counts> groups;
    FairnessReport report;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!subgroups[i].has_value()) {
            ++report.missing_subgroup_count;
            continue;
        }
        Counts& c = groups[*subgroups[i]];
        ++c.total;
        if (taxonomy.is_malignant(labels[i])) {
            ++c.positives;
            if (taxonomy.is_malignant(predictions[i])) ++c.recalled;
        }
    }

    for (const auto& [name, c] : groups) {
        if (c.positives == 0) {
            report.excluded.push_back({name, c.total});
            continue;
        }
        report.per_subgroup.push_back(
            {name, static_cast<double>(c.recalled) / static_cast<double>(c.positives),
             c.positives});
    }
    ECOFAIR_REQUIRE(!report.per_subgroup.empty(), ErrorCode::NoEvaluableSubgroup,
                    "no subgroup contains a malignant-labelled sample");

    double sum = 0.0;
    double worst = report.per_subgroup.front().tpr;
    double best = worst;
    for (const SubgroupTpr& g : report.per_subgroup) {
        sum += g.tpr;
        worst = std::min(worst, g.tpr);
        best = std::max(best, g.tpr);
    }
    report.tpr_mean = sum / static_cast<double>(report.per_subgroup.size());
    report.tpr_worst = worst;
    report.tpr_gap = best - worst;
    return report;
}

FairnessDelta fairness_delta(const FairnessReport& eco, const FairnessReport& baseline) {
    ECOFAIR_REQUIRE(eco.per_subgroup.size() == baseline.per_subgroup.size(),
                    ErrorCode::SubgroupMismatch, "reports cover different subgroup sets");
    for (std::size_t i = 0; i < eco.per_subgroup.size(); ++i) {
        ECOFAIR_REQUIRE(eco.per_subgroup[i].subgroup == baseline.per_subgroup[i].subgroup,
                        ErrorCode::SubgroupMismatch, "reports cover different subgroup sets");
    }
    return FairnessDelta{eco.tpr_worst - baseline.tpr_worst, baseline.tpr_gap - eco.tpr_gap};
}

MeanStd aggregate_folds(std::span<const double> per_fold_values) {
    ECOFAIR_REQUIRE(!per_fold_values.empty(), ErrorCode::EmptyInput,
                    "cannot aggregate zero folds");
    const double n = static_cast<double>(per_fold_values.size());
    double mean = 0.0;
    for (double v : per_fold_values) mean += v;
    mean /= n;
    if (per_fold_values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : per_fold_values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

} // namespace ecofair::metrics

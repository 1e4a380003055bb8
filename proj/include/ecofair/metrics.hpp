#pragma once

#include "ecofair/types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ecofair::metrics {

// Index of the largest entry; ties broken by the lowest class index.
std::size_t argmax_class(std::span<const double> values);

// C x C count matrix: entry (i, j) counts true class i predicted as j.
using Confusion = std::vector<std::vector<std::size_t>>;

Confusion confusion(std::span<const std::size_t> labels, std::span<const std::size_t> predictions,
                    std::size_t num_classes);

// Unweighted mean of per-class F1; a class with precision + recall = 0
// contributes 0.
double macro_f1(const Confusion& m);

// Unweighted mean of per-class recall over classes with at least one true
// instance.
double balanced_accuracy(const Confusion& m);

// Binarised recall: fraction of malignant-labelled samples whose prediction
// lands anywhere in the malignant set.
double malignant_recall(std::span<const std::size_t> labels,
                        std::span<const std::size_t> predictions, const ClassTaxonomy& taxonomy);

struct SubgroupTpr {
    std::string subgroup;
    double tpr = 0.0;
    std::size_t positives = 0; // malignant-labelled samples in this subgroup
};

struct ExcludedSubgroup {
    std::string subgroup;
    std::size_t count = 0; // samples in the subgroup (none malignant-labelled)
};

struct FairnessReport {
    std::vector<SubgroupTpr> per_subgroup; // included groups, sorted by name
    double tpr_mean = 0.0;
    double tpr_worst = 0.0;
    double tpr_gap = 0.0;
    std::vector<ExcludedSubgroup> excluded; // groups with zero malignant positives
    std::size_t missing_subgroup_count = 0; // samples without a subgroup value
};

// Malignant-case TPR per subgroup plus mean / worst / max-min gap over the
// included groups. Subgroups with zero malignant positives are excluded from
// the statistics and reported; samples without a subgroup are skipped and
// counted.
FairnessReport fairness(std::span<const std::size_t> labels,
                        std::span<const std::size_t> predictions,
                        std::span<const std::optional<std::string>> subgroups,
                        const ClassTaxonomy& taxonomy);

struct FairnessDelta {
    double wg_tpr = 0.0; // tpr_worst(eco) - tpr_worst(baseline)
    double gap = 0.0;    // tpr_gap(baseline) - tpr_gap(eco)
};

// Signs are chosen so a positive value means improvement in both fields.
// Requires both reports to cover the same included subgroup set.
FairnessDelta fairness_delta(const FairnessReport& eco, const FairnessReport& baseline);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; // sample (n-1) standard deviation; 0 for a single value
};

MeanStd aggregate_folds(std::span<const double> per_fold_values);

} // namespace ecofair::metrics

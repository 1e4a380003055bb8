#pragma once

#include "ecofair/dataset.hpp"
#include "ecofair/energy.hpp"
#include "ecofair/fusion.hpp"
#include "ecofair/io.hpp"
#include "ecofair/metrics.hpp"
#include "ecofair/risk.hpp"
#include "ecofair/routing.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ecofair::harness {

enum class Arm { Lite, Heavy, Ecofair };

const char* to_string(Arm arm);
Arm arm_from_string(const std::string& s);

struct DatasetSource {
    std::optional<SynthSpec> synth;
    // file-based source (used when synth is absent)
    std::string metadata_path;
    std::map<std::string, std::pair<std::string, std::string>> encoder_paths;
    std::string profiles_path;
    std::optional<ClassTaxonomy> taxonomy;
};

struct RunConfig {
    DatasetSource source;
    std::string lite_encoder = kSynthLiteEncoderId;
    std::string heavy_encoder = kSynthHeavyEncoderId;
    RoutingConfig routing;
    fusion::TrainConfig fusion_cfg;
    std::size_t folds = 5;
    std::uint64_t seed = 7;
    std::string output_dir = "out";
    std::vector<Arm> arms = {Arm::Lite, Arm::Heavy, Arm::Ecofair};
    bool write_models = true;
};

// Loads the dataset (synthetic or files) and ensures every sample carries a
// fold in [0, folds): existing complete assignments are respected, anything
// else is replaced by a stratified assignment seeded from the run seed.
Dataset prepare_dataset(const RunConfig& cfg, std::vector<std::string>* warnings = nullptr);

// Everything trained per fold from the training split only.
struct PreparedFold {
    int fold = 0;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    risk::RiskModel risk_model;
    fusion::FoldHeads heads;
};

// Trains risk model + fusion heads per fold; folds run concurrently and the
// result order is fixed by fold index.
std::vector<PreparedFold> prepare_folds(const Dataset& d, const RunConfig& cfg);

struct EcofairFoldOutcome {
    std::vector<std::size_t> predictions; // aligned to fold.test_idx
    std::vector<RouteDecision> decisions;
};

// Routes every test sample of the fold and predicts through the head matching
// the gate. The chosen pathway equals the recorded gate bit by construction.
EcofairFoldOutcome evaluate_ecofair_fold(const Dataset& d, const PreparedFold& fold,
                                         const RoutingConfig& routing,
                                         const std::string& lite_id, const std::string& heavy_id);

// Lite or heavy baseline predictions for the fold's test split.
std::vector<std::size_t> evaluate_baseline_fold(const Dataset& d, const PreparedFold& fold,
                                                Arm arm, const std::string& lite_id,
                                                const std::string& heavy_id);

// Pooled per-arm evaluation outputs, in fold order.
struct ArmOutputs {
    std::vector<std::string> sample_ids;
    std::vector<std::size_t> labels;
    std::vector<std::size_t> predictions;
    std::vector<std::optional<std::string>> subgroups;
    std::vector<io::FoldDecision> decisions; // ecofair arm only
};

struct MetricsRow {
    Arm arm = Arm::Lite;
    std::string fold_label; // "0".."k-1", "pooled", "mean", "std"
    double n = 0.0;
    std::optional<double> macro_f1;
    std::optional<double> balanced_accuracy;
    std::optional<double> malignant_recall;
    std::optional<double> tpr_mean;
    std::optional<double> tpr_worst;
    std::optional<double> tpr_gap;
    std::optional<double> excluded_subgroups;
    std::optional<double> routing_pct;
    std::optional<double> e_per_sample_j;
    std::optional<double> savings_vs_heavy;
    std::optional<double> savings_vs_lite;
    std::optional<double> delta_wg_tpr_vs_lite;
    std::optional<double> delta_gap_vs_lite;
    std::optional<double> delta_wg_tpr_vs_heavy;
    std::optional<double> delta_gap_vs_heavy;
    std::optional<metrics::FairnessReport> fairness; // per-fold and pooled rows
};

struct RunReport {
    nlohmann::json config_echo;
    std::vector<MetricsRow> rows;
    std::map<Arm, ArmOutputs> outputs;
    std::optional<energy::EnergyReport> energy; // present when ecofair arm ran
    std::vector<std::string> warnings;
};

// Cross-validation driver: evaluates every requested arm on each fold's test
// split using the prepared per-fold models. Pure computation; writes nothing.
RunReport run_cv(const RunConfig& cfg, const Dataset& dataset,
                 const std::vector<PreparedFold>& folds);

// Prepares the folds first, then runs.
RunReport run_cv(const RunConfig& cfg, const Dataset& dataset);

// Convenience: prepare the dataset, run, and write decisions.csv, report.csv,
// report.json and per-fold model files into cfg.output_dir.
RunReport run_cv(const RunConfig& cfg);

void write_run_outputs(const std::filesystem::path& out_dir, const RunConfig& cfg,
                       const std::vector<PreparedFold>& folds, const RunReport& report);

// The report.json document (config echo, rows, energy block, warnings).
nlohmann::json run_report_to_json(const RunReport& report);

// Rebuilds the mean/std aggregate rows of an existing report.csv from its
// per-fold rows and rewrites the file. Returns the recomputed rows.
std::vector<std::vector<std::string>> reaggregate_report_csv(const std::filesystem::path& path);

// config (de)serialisation; the echo carries every resolved default
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);
SynthSpec parse_synth_spec(const nlohmann::json& j);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);
RoutingConfig parse_routing_config(const nlohmann::json& j);
nlohmann::json routing_config_to_json(const RoutingConfig& cfg);

} // namespace ecofair::harness

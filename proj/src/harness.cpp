#include "ecofair/harness.hpp"

#include "ecofair/error.hpp"
#include "ecofair/rng.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>

namespace ecofair::harness {

using nlohmann::json;

const char* to_string(Arm arm) {
    switch (arm) {
    case Arm::Lite: return "lite";
    case Arm::Heavy: return "heavy";
    case Arm::Ecofair: return "ecofair";
    }
    return "lite";
}

Arm arm_from_string(const std::string& s) {
    if (s == "lite") return Arm::Lite;
    if (s == "heavy") return Arm::Heavy;
    if (s == "ecofair") return Arm::Ecofair;
    raise(ErrorCode::SchemaError, "unknown arm '" + s + "'");
}

Dataset prepare_dataset(const RunConfig& cfg, std::vector<std::string>* warnings) {
    ECOFAIR_REQUIRE(cfg.folds >= 2, ErrorCode::InvalidArgument, "fold count must be >= 2");
    Dataset d;
    if (cfg.source.synth.has_value()) {
        d = synth_generate(*cfg.source.synth);
    } else {
        ECOFAIR_REQUIRE(cfg.source.taxonomy.has_value(), ErrorCode::SchemaError,
                        "file-based dataset sources require a taxonomy");
        d = io::load_dataset(cfg.source.metadata_path, cfg.source.encoder_paths,
                             cfg.source.profiles_path, *cfg.source.taxonomy);
    }
    d.profile(cfg.lite_encoder);
    d.profile(cfg.heavy_encoder);

    bool complete = !d.samples.empty();
    bool any = false;
    for (const Sample& s : d.samples) {
        if (s.fold.has_value()) {
            any = true;
            if (*s.fold < 0 || static_cast<std::size_t>(*s.fold) >= cfg.folds) complete = false;
        } else {
            complete = false;
        }
    }
    if (!complete) {
        if (any && warnings)
            warnings->push_back("incomplete or out-of-range fold column; reassigning folds");
        d = stratified_folds(std::move(d), cfg.folds, cfg.seed, /*strict=*/false, warnings);
    }
    return d;
}

std::vector<PreparedFold> prepare_folds(const Dataset& d, const RunConfig& cfg) {
    std::vector<std::future<PreparedFold>> futures;
    futures.reserve(cfg.folds);
    for (std::size_t f = 0; f < cfg.folds; ++f) {
        futures.push_back(std::async(std::launch::async, [&d, &cfg, f]() {
            PreparedFold fold;
            fold.fold = static_cast<int>(f);
            for (std::size_t i = 0; i < d.samples.size(); ++i) {
                const auto assigned = d.samples[i].fold;
                ECOFAIR_REQUIRE(assigned.has_value(), ErrorCode::InvalidArgument,
                                "sample without fold assignment");
                if (static_cast<std::size_t>(*assigned) == f) fold.test_idx.push_back(i);
                else fold.train_idx.push_back(i);
            }
            ECOFAIR_REQUIRE(!fold.train_idx.empty(), ErrorCode::TooFewSamples,
                            "fold " + std::to_string(f) + " has an empty training split");
            std::vector<Sample> train_samples;
            train_samples.reserve(fold.train_idx.size());
            for (std::size_t i : fold.train_idx) train_samples.push_back(d.samples[i]);
            try {
                fold.risk_model = risk::calibrate(train_samples, d.taxonomy);
                fold.heads = fusion::train_fusion_heads(
                    d, fold.train_idx, cfg.lite_encoder, cfg.heavy_encoder, fold.risk_model,
                    cfg.routing.heavy_transmission, cfg.fusion_cfg,
                    Rng::derive(cfg.seed, 0x8ead5ULL + f), fold.fold);
            } catch (Error& e) {
                throw Error(e.code(), "fold " + std::to_string(f) + ": " + e.what());
            }
            return fold;
        }));
    }
    std::vector<PreparedFold> folds;
    folds.reserve(cfg.folds);
    for (auto& f : futures) folds.push_back(f.get());
    return folds;
}

namespace {

const fusion::FusionHead& gated_head(const PreparedFold& fold, const RoutingConfig& routing) {
    if (routing.heavy_transmission == HeavyTransmission::Alongside) {
        ECOFAIR_REQUIRE(fold.heads.combined.has_value(), ErrorCode::InvalidArgument,
                        "alongside transmission requires a combined head");
        return *fold.heads.combined;
    }
    return fold.heads.heavy;
}

Embedding image_embedding(const Dataset& d, std::size_t idx, const std::string& encoder_id) {
    return Embedding{d.table(encoder_id).embeddings[idx], encoder_id};
}

Embedding concat_embeddings(const Embedding& a, const Embedding& b) {
    Embedding out;
    out.values = a.values;
    out.values.insert(out.values.end(), b.values.begin(), b.values.end());
    out.encoder_id = a.encoder_id + "+" + b.encoder_id;
    return out;
}

} // namespace

EcofairFoldOutcome evaluate_ecofair_fold(const Dataset& d, const PreparedFold& fold,
                                         const RoutingConfig& routing,
                                         const std::string& lite_id, const std::string& heavy_id) {
    const EncoderTable& lite_table = d.table(lite_id);
    ECOFAIR_REQUIRE(lite_table.has_probabilities(), ErrorCode::SchemaError,
                    "routing requires probabilities for the lite encoder '" + lite_id + "'");
    EcofairFoldOutcome out;
    out.predictions.reserve(fold.test_idx.size());
    out.decisions.reserve(fold.test_idx.size());
    for (std::size_t idx : fold.test_idx) {
        const Sample& s = d.samples[idx];
        const PredictiveDistribution p_lite{lite_table.probabilities[idx]};
        RouteDecision decision =
            routing::route_sample(s, p_lite, fold.risk_model, d.taxonomy, routing);
        const Embedding tab = fold.heads.featuriser.featurise(s);
        PredictiveDistribution fused;
        if (decision.gate) {
            const fusion::FusionHead& head = gated_head(fold, routing);
            const Embedding heavy = image_embedding(d, idx, heavy_id);
            if (routing.heavy_transmission == HeavyTransmission::Alongside) {
                fused = fusion::fuse_predict(
                    concat_embeddings(image_embedding(d, idx, lite_id), heavy), tab, head);
            } else {
                fused = fusion::fuse_predict(heavy, tab, head);
            }
        } else {
            fused = fusion::fuse_predict(image_embedding(d, idx, lite_id), tab, fold.heads.lite);
        }
        out.predictions.push_back(metrics::argmax_class(fused.probs));
        out.decisions.push_back(std::move(decision));
    }
    return out;
}

std::vector<std::size_t> evaluate_baseline_fold(const Dataset& d, const PreparedFold& fold,
                                                Arm arm, const std::string& lite_id,
                                                const std::string& heavy_id) {
    ECOFAIR_REQUIRE(arm != Arm::Ecofair, ErrorCode::InvalidArgument,
                    "baseline evaluation is for the lite/heavy arms");
    const bool lite = arm == Arm::Lite;
    const std::string& encoder_id = lite ? lite_id : heavy_id;
    const fusion::FusionHead& head = lite ? fold.heads.lite : fold.heads.heavy;
    std::vector<std::size_t> predictions;
    predictions.reserve(fold.test_idx.size());
    for (std::size_t idx : fold.test_idx) {
        const Embedding tab = fold.heads.featuriser.featurise(d.samples[idx]);
        const PredictiveDistribution fused =
            fusion::fuse_predict(image_embedding(d, idx, encoder_id), tab, head);
        predictions.push_back(metrics::argmax_class(fused.probs));
    }
    return predictions;
}

namespace {

struct FoldEval {
    std::vector<std::size_t> labels;
    std::vector<std::size_t> predictions;
    std::vector<std::optional<std::string>> subgroups;
    std::vector<RouteDecision> decisions; // ecofair only
};

MetricsRow metrics_row(Arm arm, const std::string& fold_label, const FoldEval& eval,
                       const Dataset& d, const RunConfig& cfg,
                       std::vector<std::string>* warnings) {
    MetricsRow row;
    row.arm = arm;
    row.fold_label = fold_label;
    row.n = static_cast<double>(eval.labels.size());

    const auto cm = metrics::confusion(eval.labels, eval.predictions, d.taxonomy.num_classes());
    row.macro_f1 = metrics::macro_f1(cm);
    row.balanced_accuracy = metrics::balanced_accuracy(cm);
    try {
        row.malignant_recall = metrics::malignant_recall(eval.labels, eval.predictions, d.taxonomy);
    } catch (const Error&) {
        if (warnings)
            warnings->push_back("no malignant sample in " + std::string(to_string(arm)) +
                                " fold " + fold_label + "; malignant recall skipped");
    }
    try {
        row.fairness = metrics::fairness(eval.labels, eval.predictions, eval.subgroups, d.taxonomy);
        row.tpr_mean = row.fairness->tpr_mean;
        row.tpr_worst = row.fairness->tpr_worst;
        row.tpr_gap = row.fairness->tpr_gap;
        row.excluded_subgroups = static_cast<double>(row.fairness->excluded.size());
    } catch (const Error&) {
        if (warnings)
            warnings->push_back("no evaluable subgroup in " + std::string(to_string(arm)) +
                                " fold " + fold_label + "; fairness skipped");
    }

    const double e_lite = d.profile(cfg.lite_encoder).energy_per_sample_j;
    const double e_heavy = d.profile(cfg.heavy_encoder).energy_per_sample_j;
    if (arm == Arm::Lite) {
        row.routing_pct = 0.0;
        row.e_per_sample_j = e_lite;
    } else if (arm == Arm::Heavy) {
        row.routing_pct = 1.0;
        row.e_per_sample_j = e_heavy;
    } else {
        const energy::EnergyAccount account =
            energy::account(eval.decisions, d.profile(cfg.lite_encoder),
                            d.profile(cfg.heavy_encoder));
        row.routing_pct = account.routing_pct;
        row.e_per_sample_j = account.e_ecofair;
        row.savings_vs_heavy = account.savings_vs_heavy;
        row.savings_vs_lite = account.savings_vs_lite;
    }
    return row;
}

void attach_deltas(MetricsRow& eco_row, const MetricsRow* lite_row, const MetricsRow* heavy_row) {
    if (!eco_row.fairness.has_value()) return;
    if (lite_row && lite_row->fairness.has_value()) {
        const auto delta = metrics::fairness_delta(*eco_row.fairness, *lite_row->fairness);
        eco_row.delta_wg_tpr_vs_lite = delta.wg_tpr;
        eco_row.delta_gap_vs_lite = delta.gap;
    }
    if (heavy_row && heavy_row->fairness.has_value()) {
        const auto delta = metrics::fairness_delta(*eco_row.fairness, *heavy_row->fairness);
        eco_row.delta_wg_tpr_vs_heavy = delta.wg_tpr;
        eco_row.delta_gap_vs_heavy = delta.gap;
    }
}

// Mean/std rows over the per-fold rows, column by column; a column missing
// from some fold is aggregated over the folds that have it.
std::pair<MetricsRow, MetricsRow> aggregate_rows(Arm arm, const std::vector<MetricsRow>& fold_rows) {
    MetricsRow mean_row, std_row;
    mean_row.arm = std_row.arm = arm;
    mean_row.fold_label = "mean";
    std_row.fold_label = "std";

    auto aggregate = [&fold_rows](auto member) {
        std::vector<double> values;
        for (const MetricsRow& r : fold_rows) {
            const auto& v = r.*member;
            if (v.has_value()) values.push_back(*v);
        }
        return values;
    };
    auto apply = [&](auto member) {
        const std::vector<double> values = aggregate(member);
        if (values.empty()) return;
        const metrics::MeanStd ms = metrics::aggregate_folds(values);
        mean_row.*member = ms.mean;
        std_row.*member = ms.std;
    };
    apply(&MetricsRow::macro_f1);
    apply(&MetricsRow::balanced_accuracy);
    apply(&MetricsRow::malignant_recall);
    apply(&MetricsRow::tpr_mean);
    apply(&MetricsRow::tpr_worst);
    apply(&MetricsRow::tpr_gap);
    apply(&MetricsRow::excluded_subgroups);
    apply(&MetricsRow::routing_pct);
    apply(&MetricsRow::e_per_sample_j);
    apply(&MetricsRow::savings_vs_heavy);
    apply(&MetricsRow::savings_vs_lite);
    apply(&MetricsRow::delta_wg_tpr_vs_lite);
    apply(&MetricsRow::delta_gap_vs_lite);
    apply(&MetricsRow::delta_wg_tpr_vs_heavy);
    apply(&MetricsRow::delta_gap_vs_heavy);

    std::vector<double> ns;
    for (const MetricsRow& r : fold_rows) ns.push_back(r.n);
    const metrics::MeanStd n_ms = metrics::aggregate_folds(ns);
    mean_row.n = n_ms.mean;
    std_row.n = n_ms.std;
    return {mean_row, std_row};
}

} // namespace

RunReport run_cv(const RunConfig& cfg, const Dataset& dataset,
                 const std::vector<PreparedFold>& folds) {
    validate_routing_config(cfg.routing);
    ECOFAIR_REQUIRE(!cfg.arms.empty(), ErrorCode::InvalidArgument, "no evaluation arms requested");
    RunReport report;
    report.config_echo = run_config_to_json(cfg);

    // Evaluate the requested arms; baselines are also evaluated when the
    // ecofair arm needs them for deltas.
    std::set<Arm> requested(cfg.arms.begin(), cfg.arms.end());
    std::set<Arm> to_eval = requested;
    if (requested.count(Arm::Ecofair)) {
        to_eval.insert(Arm::Lite);
        to_eval.insert(Arm::Heavy);
    }

    std::map<Arm, std::vector<FoldEval>> evals;
    std::vector<const PreparedFold*> evaluable;
    for (const PreparedFold& fold : folds) {
        if (fold.test_idx.empty()) {
            report.warnings.push_back("fold " + std::to_string(fold.fold) +
                                      " has an empty test split; skipped");
            continue;
        }
        evaluable.push_back(&fold);
        FoldEval base;
        for (std::size_t idx : fold.test_idx) {
            base.labels.push_back(dataset.samples[idx].label);
            base.subgroups.push_back(dataset.samples[idx].subgroup);
        }
        for (Arm arm : to_eval) {
            FoldEval eval = base;
            if (arm == Arm::Ecofair) {
                EcofairFoldOutcome outcome = evaluate_ecofair_fold(
                    dataset, fold, cfg.routing, cfg.lite_encoder, cfg.heavy_encoder);
                eval.predictions = std::move(outcome.predictions);
                eval.decisions = std::move(outcome.decisions);
            } else {
                eval.predictions =
                    evaluate_baseline_fold(dataset, fold, arm, cfg.lite_encoder, cfg.heavy_encoder);
            }
            evals[arm].push_back(std::move(eval));
        }
    }

    ECOFAIR_REQUIRE(!evaluable.empty(), ErrorCode::TooFewSamples, "no fold has test samples");

    // Pooled outputs per arm (fold order), kept for downstream consumers.
    for (Arm arm : to_eval) {
        ArmOutputs outputs;
        for (std::size_t f = 0; f < evaluable.size(); ++f) {
            const FoldEval& eval = evals[arm][f];
            for (std::size_t j = 0; j < evaluable[f]->test_idx.size(); ++j) {
                const Sample& s = dataset.samples[evaluable[f]->test_idx[j]];
                outputs.sample_ids.push_back(s.id);
                outputs.labels.push_back(eval.labels[j]);
                outputs.predictions.push_back(eval.predictions[j]);
                outputs.subgroups.push_back(eval.subgroups[j]);
                if (arm == Arm::Ecofair)
                    outputs.decisions.push_back({evaluable[f]->fold, eval.decisions[j]});
            }
        }
        report.outputs[arm] = std::move(outputs);
    }

    // Per-(arm, fold) rows in canonical arm order, for requested arms only.
    const Arm order[] = {Arm::Lite, Arm::Heavy, Arm::Ecofair};
    std::map<Arm, std::vector<MetricsRow>> fold_rows;
    std::map<Arm, MetricsRow> pooled_rows;
    for (Arm arm : to_eval) {
        for (std::size_t f = 0; f < evaluable.size(); ++f) {
            fold_rows[arm].push_back(metrics_row(arm, std::to_string(evaluable[f]->fold),
                                                 evals[arm][f], dataset, cfg, &report.warnings));
        }
        FoldEval pooled;
        const ArmOutputs& out = report.outputs[arm];
        pooled.labels = out.labels;
        pooled.predictions = out.predictions;
        pooled.subgroups = out.subgroups;
        for (const io::FoldDecision& fd : out.decisions) pooled.decisions.push_back(fd.decision);
        pooled_rows[arm] = metrics_row(arm, "pooled", pooled, dataset, cfg, &report.warnings);
    }

    if (to_eval.count(Arm::Ecofair)) {
        for (std::size_t f = 0; f < evaluable.size(); ++f) {
            attach_deltas(fold_rows[Arm::Ecofair][f], &fold_rows[Arm::Lite][f],
                          &fold_rows[Arm::Heavy][f]);
        }
        attach_deltas(pooled_rows[Arm::Ecofair], &pooled_rows[Arm::Lite],
                      &pooled_rows[Arm::Heavy]);
        std::vector<std::vector<RouteDecision>> per_fold_decisions;
        for (const FoldEval& eval : evals[Arm::Ecofair])
            per_fold_decisions.push_back(eval.decisions);
        report.energy = energy::account_per_fold(per_fold_decisions, dataset.profile(cfg.lite_encoder),
                                                 dataset.profile(cfg.heavy_encoder));
    }

    for (Arm arm : order) {
        if (!requested.count(arm)) continue;
        for (MetricsRow& row : fold_rows[arm]) report.rows.push_back(std::move(row));
        report.rows.push_back(std::move(pooled_rows[arm]));
        const auto [mean_row, std_row] = aggregate_rows(arm, fold_rows[arm]);
        report.rows.push_back(mean_row);
        report.rows.push_back(std_row);
    }
    return report;
}

namespace {

const std::vector<std::string> kReportHeader = {
    "arm",
    "fold",
    "n",
    "macro_f1",
    "balanced_accuracy",
    "malignant_recall",
    "tpr_mean",
    "tpr_worst",
    "tpr_gap",
    "excluded_subgroups",
    "routing_pct",
    "e_per_sample_j",
    "savings_vs_heavy",
    "savings_vs_lite",
    "delta_wg_tpr_vs_lite",
    "delta_gap_vs_lite",
    "delta_wg_tpr_vs_heavy",
    "delta_gap_vs_heavy",
};

std::string opt_cell(const std::optional<double>& v) {
    return v.has_value() ? io::format_sig6(*v) : std::string();
}

std::vector<std::string> row_to_cells(const MetricsRow& row) {
    return {to_string(row.arm),
            row.fold_label,
            io::format_sig6(row.n),
            opt_cell(row.macro_f1),
            opt_cell(row.balanced_accuracy),
            opt_cell(row.malignant_recall),
            opt_cell(row.tpr_mean),
            opt_cell(row.tpr_worst),
            opt_cell(row.tpr_gap),
            opt_cell(row.excluded_subgroups),
            opt_cell(row.routing_pct),
            opt_cell(row.e_per_sample_j),
            opt_cell(row.savings_vs_heavy),
            opt_cell(row.savings_vs_lite),
            opt_cell(row.delta_wg_tpr_vs_lite),
            opt_cell(row.delta_gap_vs_lite),
            opt_cell(row.delta_wg_tpr_vs_heavy),
            opt_cell(row.delta_gap_vs_heavy)};
}

double round_sig6(double v) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    return io::parse_double(io::format_sig6(v), "rounded report value");
}

json opt_json(const std::optional<double>& v) {
    return v.has_value() ? json(round_sig6(*v)) : json();
}

json row_to_json(const MetricsRow& row) {
    json j{{"arm", to_string(row.arm)},
           {"fold", row.fold_label},
           {"n", round_sig6(row.n)},
           {"macro_f1", opt_json(row.macro_f1)},
           {"balanced_accuracy", opt_json(row.balanced_accuracy)},
           {"malignant_recall", opt_json(row.malignant_recall)},
           {"tpr_mean", opt_json(row.tpr_mean)},
           {"tpr_worst", opt_json(row.tpr_worst)},
           {"tpr_gap", opt_json(row.tpr_gap)},
           {"routing_pct", opt_json(row.routing_pct)},
           {"e_per_sample_j", opt_json(row.e_per_sample_j)},
           {"savings_vs_heavy", opt_json(row.savings_vs_heavy)},
           {"savings_vs_lite", opt_json(row.savings_vs_lite)},
           {"delta_wg_tpr_vs_lite", opt_json(row.delta_wg_tpr_vs_lite)},
           {"delta_gap_vs_lite", opt_json(row.delta_gap_vs_lite)},
           {"delta_wg_tpr_vs_heavy", opt_json(row.delta_wg_tpr_vs_heavy)},
           {"delta_gap_vs_heavy", opt_json(row.delta_gap_vs_heavy)}};
    if (row.fairness.has_value()) {
        json per_group = json::object();
        for (const auto& g : row.fairness->per_subgroup) {
            per_group[g.subgroup] = {{"tpr", round_sig6(g.tpr)}, {"positives", g.positives}};
        }
        json excluded = json::object();
        for (const auto& e : row.fairness->excluded) excluded[e.subgroup] = e.count;
        j["fairness"] = {{"per_subgroup", std::move(per_group)},
                         {"excluded", std::move(excluded)},
                         {"missing_subgroup_count", row.fairness->missing_subgroup_count}};
    }
    return j;
}

} // namespace

nlohmann::json run_report_to_json(const RunReport& report) {
    json j;
    j["config"] = report.config_echo;
    j["rows"] = json::array();
    for (const MetricsRow& row : report.rows) j["rows"].push_back(row_to_json(row));
    if (report.energy.has_value()) {
        const energy::EnergyReport& e = *report.energy;
        json per_fold = json::array();
        for (const auto& account : e.per_fold) {
            per_fold.push_back({{"e_ecofair", round_sig6(account.e_ecofair)},
                                {"routing_pct", round_sig6(account.routing_pct)},
                                {"savings_vs_heavy", round_sig6(account.savings_vs_heavy)}});
        }
        j["energy"] = {{"e_lite", round_sig6(e.pooled.e_lite)},
                       {"e_heavy", round_sig6(e.pooled.e_heavy)},
                       {"pooled_e_ecofair", round_sig6(e.pooled.e_ecofair)},
                       {"pooled_routing_pct", round_sig6(e.pooled.routing_pct)},
                       {"per_fold", std::move(per_fold)},
                       {"e_ecofair_mean", round_sig6(e.e_ecofair.mean)},
                       {"e_ecofair_std", round_sig6(e.e_ecofair.std)},
                       {"routing_pct_mean", round_sig6(e.routing_pct.mean)},
                       {"routing_pct_std", round_sig6(e.routing_pct.std)},
                       {"savings_vs_heavy_mean", round_sig6(e.savings_vs_heavy.mean)},
                       {"savings_vs_heavy_std", round_sig6(e.savings_vs_heavy.std)}};
    }
    if (!report.warnings.empty()) j["warnings"] = report.warnings;
    return j;
}

void write_run_outputs(const std::filesystem::path& out_dir, const RunConfig& cfg,
                       const std::vector<PreparedFold>& folds, const RunReport& report) {
    std::filesystem::create_directories(out_dir);

    auto eco = report.outputs.find(Arm::Ecofair);
    if (eco != report.outputs.end()) {
        io::write_decisions_csv(out_dir / "decisions.csv", eco->second.decisions);
    }

    std::vector<std::vector<std::string>> cells;
    cells.reserve(report.rows.size());
    for (const MetricsRow& row : report.rows) cells.push_back(row_to_cells(row));
    io::write_csv(out_dir / "report.csv", kReportHeader, cells);

    io::write_json_file(out_dir / "report.json", run_report_to_json(report));

    if (cfg.write_models) {
        const std::filesystem::path models = out_dir / "models";
        for (const PreparedFold& fold : folds) {
            const std::string stem = "fold" + std::to_string(fold.fold);
            io::write_risk_model_json(models / (stem + "_risk.json"), fold.risk_model);
            io::write_fusion_head_json(models / (stem + "_lite_head.json"), fold.heads.lite);
            io::write_fusion_head_json(models / (stem + "_heavy_head.json"), fold.heads.heavy);
            if (fold.heads.combined.has_value()) {
                io::write_fusion_head_json(models / (stem + "_combined_head.json"),
                                           *fold.heads.combined);
            }
        }
    }
}

RunReport run_cv(const RunConfig& cfg, const Dataset& dataset) {
    return run_cv(cfg, dataset, prepare_folds(dataset, cfg));
}

RunReport run_cv(const RunConfig& cfg) {
    std::vector<std::string> warnings;
    const Dataset dataset = prepare_dataset(cfg, &warnings);
    const std::vector<PreparedFold> folds = prepare_folds(dataset, cfg);
    RunReport report = run_cv(cfg, dataset, folds);
    report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
    write_run_outputs(cfg.output_dir, cfg, folds, report);
    return report;
}

std::vector<std::vector<std::string>> reaggregate_report_csv(const std::filesystem::path& path) {
    const io::CsvTable table = io::read_csv(path);
    ECOFAIR_REQUIRE(table.header == kReportHeader, ErrorCode::SchemaError,
                    "unexpected report header in '" + path.string() + "'");
    const std::size_t arm_col = 0, fold_col = 1;

    // Collect per-fold rows by arm, preserving arm order of appearance.
    std::vector<std::string> arm_order;
    std::map<std::string, std::vector<std::vector<std::string>>> by_arm;
    std::map<std::string, std::vector<std::string>> pooled_by_arm;
    for (const auto& row : table.rows) {
        const std::string& fold = row[fold_col];
        if (fold == "mean" || fold == "std") continue; // recomputed below
        if (!by_arm.count(row[arm_col])) arm_order.push_back(row[arm_col]);
        if (fold == "pooled") pooled_by_arm[row[arm_col]] = row;
        else by_arm[row[arm_col]].push_back(row);
    }

    std::vector<std::vector<std::string>> out_rows;
    for (const std::string& arm : arm_order) {
        const auto& fold_rows = by_arm[arm];
        ECOFAIR_REQUIRE(!fold_rows.empty(), ErrorCode::SchemaError,
                        "no per-fold rows for arm '" + arm + "'");
        for (const auto& row : fold_rows) out_rows.push_back(row);
        if (pooled_by_arm.count(arm)) out_rows.push_back(pooled_by_arm[arm]);
        std::vector<std::string> mean_row(table.header.size()), std_row(table.header.size());
        mean_row[arm_col] = std_row[arm_col] = arm;
        mean_row[fold_col] = "mean";
        std_row[fold_col] = "std";
        for (std::size_t c = 2; c < table.header.size(); ++c) {
            std::vector<double> values;
            for (const auto& row : fold_rows) {
                if (!row[c].empty())
                    values.push_back(io::parse_double(row[c], "report cell"));
            }
            if (values.empty()) continue;
            const metrics::MeanStd ms = metrics::aggregate_folds(values);
            mean_row[c] = io::format_sig6(ms.mean);
            std_row[c] = io::format_sig6(ms.std);
        }
        out_rows.push_back(std::move(mean_row));
        out_rows.push_back(std::move(std_row));
    }
    io::write_csv(path, table.header, out_rows);
    return out_rows;
}

// ---------------------------------------------------------------------------
// config parsing

SynthSpec parse_synth_spec(const json& j) {
    SynthSpec spec;
    try {
        spec.seed = j.value("seed", spec.seed);
        spec.n_samples = j.value("n_samples", spec.n_samples);
        spec.num_classes = j.value("num_classes", spec.num_classes);
        spec.n_localizations = j.value("n_localizations", spec.n_localizations);
        spec.n_subgroups = j.value("n_subgroups", spec.n_subgroups);
        spec.class_prior = j.value("class_prior", spec.class_prior);
        spec.lite_noise = j.value("lite_noise", spec.lite_noise);
        spec.heavy_noise = j.value("heavy_noise", spec.heavy_noise);
        spec.lite_noise_per_subgroup =
            j.value("lite_noise_per_subgroup", spec.lite_noise_per_subgroup);
        spec.age_lo = j.value("age_lo", spec.age_lo);
        spec.age_hi = j.value("age_hi", spec.age_hi);
        spec.lite_dim = j.value("lite_dim", spec.lite_dim);
        spec.heavy_dim = j.value("heavy_dim", spec.heavy_dim);
        spec.lite_energy_j = j.value("lite_energy_j", spec.lite_energy_j);
        spec.heavy_energy_j = j.value("heavy_energy_j", spec.heavy_energy_j);
        spec.lite_latency_ms = j.value("lite_latency_ms", spec.lite_latency_ms);
        spec.heavy_latency_ms = j.value("heavy_latency_ms", spec.heavy_latency_ms);
    } catch (const json::exception& e) {
        raise(ErrorCode::InvalidSpec, std::string("bad synth spec: ") + e.what());
    }
    validate_synth_spec(spec);
    return spec;
}

json synth_spec_to_json(const SynthSpec& spec) {
    return json{{"seed", spec.seed},
                {"n_samples", spec.n_samples},
                {"num_classes", spec.num_classes},
                {"n_localizations", spec.n_localizations},
                {"n_subgroups", spec.n_subgroups},
                {"class_prior", spec.class_prior},
                {"lite_noise", spec.lite_noise},
                {"heavy_noise", spec.heavy_noise},
                {"lite_noise_per_subgroup", spec.lite_noise_per_subgroup},
                {"age_lo", spec.age_lo},
                {"age_hi", spec.age_hi},
                {"lite_dim", spec.lite_dim},
                {"heavy_dim", spec.heavy_dim},
                {"lite_energy_j", spec.lite_energy_j},
                {"heavy_energy_j", spec.heavy_energy_j},
                {"lite_latency_ms", spec.lite_latency_ms},
                {"heavy_latency_ms", spec.heavy_latency_ms}};
}

RoutingConfig parse_routing_config(const json& j) {
    RoutingConfig cfg;
    try {
        cfg.gate_mode = gate_mode_from_string(j.value("gate_mode", std::string("trigger")));
        cfg.lambda_h = j.value("lambda_h", cfg.lambda_h);
        cfg.lambda_delta = j.value("lambda_delta", cfg.lambda_delta);
        cfg.tau_r = j.value("tau_r", cfg.tau_r);
        cfg.tau_h = j.value("tau_h", cfg.tau_h);
        cfg.tau_delta = j.value("tau_delta", cfg.tau_delta);
        cfg.tau_risk = j.value("tau_risk", cfg.tau_risk);
        cfg.heavy_transmission =
            transmission_from_string(j.value("heavy_transmission", std::string("replace")));
    } catch (const json::exception& e) {
        raise(ErrorCode::SchemaError, std::string("bad routing config: ") + e.what());
    }
    validate_routing_config(cfg);
    return cfg;
}

json routing_config_to_json(const RoutingConfig& cfg) {
    return json{{"gate_mode", to_string(cfg.gate_mode)},
                {"lambda_h", cfg.lambda_h},
                {"lambda_delta", cfg.lambda_delta},
                {"tau_r", cfg.tau_r},
                {"tau_h", cfg.tau_h},
                {"tau_delta", cfg.tau_delta},
                {"tau_risk", cfg.tau_risk},
                {"heavy_transmission", to_string(cfg.heavy_transmission)}};
}

RunConfig parse_run_config(const json& j) {
    RunConfig cfg;
    try {
        const json& source = j.at("dataset");
        if (source.contains("synth")) {
            cfg.source.synth = parse_synth_spec(source.at("synth"));
        } else {
            cfg.source.metadata_path = source.at("metadata").get<std::string>();
            cfg.source.profiles_path = source.at("profiles").get<std::string>();
            if (source.contains("taxonomy_path")) {
                cfg.source.taxonomy =
                    io::read_taxonomy_json(source.at("taxonomy_path").get<std::string>());
            } else {
                cfg.source.taxonomy = io::taxonomy_from_json(source.at("taxonomy"));
            }
            for (const auto& [encoder_id, paths] : source.at("encoders").items()) {
                cfg.source.encoder_paths[encoder_id] = {paths.value("probabilities", std::string()),
                                                        paths.value("embeddings", std::string())};
            }
        }
        if (j.contains("pair")) {
            cfg.lite_encoder = j.at("pair").at("lite").get<std::string>();
            cfg.heavy_encoder = j.at("pair").at("heavy").get<std::string>();
        }
        if (j.contains("routing")) cfg.routing = parse_routing_config(j.at("routing"));
        if (j.contains("fusion")) {
            const json& f = j.at("fusion");
            cfg.fusion_cfg.epochs = f.value("epochs", cfg.fusion_cfg.epochs);
            cfg.fusion_cfg.learning_rate = f.value("learning_rate", cfg.fusion_cfg.learning_rate);
            cfg.fusion_cfg.l2 = f.value("l2", cfg.fusion_cfg.l2);
            cfg.fusion_cfg.init_scale = f.value("init_scale", cfg.fusion_cfg.init_scale);
        }
        cfg.folds = j.value("folds", cfg.folds);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        cfg.write_models = j.value("write_models", cfg.write_models);
        if (j.contains("arms")) {
            cfg.arms.clear();
            for (const json& a : j.at("arms")) cfg.arms.push_back(arm_from_string(a.get<std::string>()));
        }
    } catch (const json::exception& e) {
        raise(ErrorCode::SchemaError, std::string("bad run config: ") + e.what());
    }
    ECOFAIR_REQUIRE(cfg.folds >= 2, ErrorCode::InvalidArgument, "folds must be >= 2");
    return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
    json dataset;
    if (cfg.source.synth.has_value()) {
        dataset["synth"] = synth_spec_to_json(*cfg.source.synth);
    } else {
        dataset["metadata"] = cfg.source.metadata_path;
        dataset["profiles"] = cfg.source.profiles_path;
        if (cfg.source.taxonomy.has_value())
            dataset["taxonomy"] = io::taxonomy_to_json(*cfg.source.taxonomy);
        json encoders = json::object();
        for (const auto& [encoder_id, paths] : cfg.source.encoder_paths) {
            encoders[encoder_id] = {{"probabilities", paths.first}, {"embeddings", paths.second}};
        }
        dataset["encoders"] = std::move(encoders);
    }
    json arms = json::array();
    for (Arm a : cfg.arms) arms.push_back(to_string(a));
    return json{{"dataset", std::move(dataset)},
                {"pair", {{"lite", cfg.lite_encoder}, {"heavy", cfg.heavy_encoder}}},
                {"routing", routing_config_to_json(cfg.routing)},
                {"fusion",
                 {{"epochs", cfg.fusion_cfg.epochs},
                  {"learning_rate", cfg.fusion_cfg.learning_rate},
                  {"l2", cfg.fusion_cfg.l2},
                  {"init_scale", cfg.fusion_cfg.init_scale}}},
                {"folds", cfg.folds},
                {"seed", cfg.seed},
                {"output_dir", cfg.output_dir},
                {"write_models", cfg.write_models},
                {"arms", std::move(arms)}};
}

} // namespace ecofair::harness

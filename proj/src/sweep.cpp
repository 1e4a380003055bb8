#include "ecofair/sweep.hpp"

#include "ecofair/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ecofair::sweep {

using nlohmann::json;

SweepGrid parse_sweep_grid(const json& j) {
    SweepGrid grid;
    try {
        grid.tau_h = j.value("tau_h", grid.tau_h);
        grid.tau_delta = j.value("tau_delta", grid.tau_delta);
        grid.tau_risk = j.value("tau_risk", grid.tau_risk);
        grid.tau_r = j.value("tau_r", grid.tau_r);
        grid.lambda_h = j.value("lambda_h", grid.lambda_h);
        grid.lambda_delta = j.value("lambda_delta", grid.lambda_delta);
    } catch (const json::exception& e) {
        raise(ErrorCode::SchemaError, std::string("bad sweep grid: ") + e.what());
    }
    return grid;
}

json sweep_grid_to_json(const SweepGrid& grid) {
    return json{{"tau_h", grid.tau_h},       {"tau_delta", grid.tau_delta},
                {"tau_risk", grid.tau_risk}, {"tau_r", grid.tau_r},
                {"lambda_h", grid.lambda_h}, {"lambda_delta", grid.lambda_delta}};
}

std::vector<OperatingPoint> grid_sweep(const Dataset& d,
                                       const std::vector<harness::PreparedFold>& folds,
                                       const harness::RunConfig& cfg, const SweepGrid& grid) {
    ECOFAIR_REQUIRE(!folds.empty(), ErrorCode::InvalidArgument, "no prepared folds");
    auto axis = [](const std::vector<double>& values, double base) {
        return values.empty() ? std::vector<double>{base} : values;
    };
    const auto tau_h = axis(grid.tau_h, cfg.routing.tau_h);
    const auto tau_delta = axis(grid.tau_delta, cfg.routing.tau_delta);
    const auto tau_risk = axis(grid.tau_risk, cfg.routing.tau_risk);
    const auto tau_r = axis(grid.tau_r, cfg.routing.tau_r);
    const auto lambda_h = axis(grid.lambda_h, cfg.routing.lambda_h);
    const auto lambda_delta = axis(grid.lambda_delta, cfg.routing.lambda_delta);

    const EncoderProfile& lite_profile = d.profile(cfg.lite_encoder);
    const EncoderProfile& heavy_profile = d.profile(cfg.heavy_encoder);

    std::vector<OperatingPoint> points;
    for (double th : tau_h)
        for (double td : tau_delta)
            for (double tr : tau_risk)
                for (double tscore : tau_r)
                    for (double lh : lambda_h)
                        for (double ld : lambda_delta) {
                            RoutingConfig rc = cfg.routing;
                            rc.tau_h = th;
                            rc.tau_delta = td;
                            rc.tau_risk = tr;
                            rc.tau_r = tscore;
                            rc.lambda_h = lh;
                            rc.lambda_delta = ld;
                            validate_routing_config(rc);

                            std::vector<std::size_t> labels, predictions;
                            std::vector<std::optional<std::string>> subgroups;
                            std::vector<RouteDecision> decisions;
                            for (const harness::PreparedFold& fold : folds) {
                                auto outcome = harness::evaluate_ecofair_fold(
                                    d, fold, rc, cfg.lite_encoder, cfg.heavy_encoder);
                                for (std::size_t j = 0; j < fold.test_idx.size(); ++j) {
                                    const Sample& s = d.samples[fold.test_idx[j]];
                                    labels.push_back(s.label);
                                    subgroups.push_back(s.subgroup);
                                    predictions.push_back(outcome.predictions[j]);
                                }
                                decisions.insert(decisions.end(), outcome.decisions.begin(),
                                                 outcome.decisions.end());
                            }

                            OperatingPoint p;
                            p.config = rc;
                            p.n_samples = labels.size();
                            const auto account =
                                energy::account(decisions, lite_profile, heavy_profile);
                            p.energy_per_sample_j = account.e_ecofair;
                            p.routing_pct = account.routing_pct;
                            const auto fairness =
                                metrics::fairness(labels, predictions, subgroups, d.taxonomy);
                            p.wg_tpr = fairness.tpr_worst;
                            p.aux["tpr_gap"] = fairness.tpr_gap;
                            p.aux["tpr_mean"] = fairness.tpr_mean;
                            p.aux["macro_f1"] = metrics::macro_f1(metrics::confusion(
                                labels, predictions, d.taxonomy.num_classes()));
                            points.push_back(std::move(p));
                        }
    return points;
}

std::vector<std::size_t> pareto_indices(std::span<const std::pair<double, double>> energy_wg) {
    ECOFAIR_REQUIRE(!energy_wg.empty(), ErrorCode::EmptyInput, "no operating points");
    std::vector<std::size_t> order(energy_wg.size());
    std::iota(order.begin(), order.end(), 0);
    // Sort by energy ascending, wg descending, input order as tiebreak; a
    // single scan with a running best wg then yields the frontier.
    std::sort(order.begin(), order.end(), [&energy_wg](std::size_t a, std::size_t b) {
        if (energy_wg[a].first != energy_wg[b].first)
            return energy_wg[a].first < energy_wg[b].first;
        if (energy_wg[a].second != energy_wg[b].second)
            return energy_wg[a].second > energy_wg[b].second;
        return a < b;
    });
    std::vector<std::size_t> frontier;
    double best_wg = -std::numeric_limits<double>::infinity();
    for (std::size_t idx : order) {
        if (energy_wg[idx].second > best_wg) {
            frontier.push_back(idx);
            best_wg = energy_wg[idx].second;
        }
    }
    return frontier; // ascending energy by construction
}

std::vector<OperatingPoint> pareto_front(std::span<const OperatingPoint> points) {
    std::vector<std::pair<double, double>> energy_wg;
    energy_wg.reserve(points.size());
    for (const OperatingPoint& p : points) {
        ECOFAIR_REQUIRE(std::isfinite(p.energy_per_sample_j) && p.energy_per_sample_j >= 0.0,
                        ErrorCode::InvalidArgument, "operating point energy must be >= 0");
        ECOFAIR_REQUIRE(p.wg_tpr >= 0.0 && p.wg_tpr <= 1.0, ErrorCode::InvalidArgument,
                        "operating point wg_tpr must be in [0,1]");
        energy_wg.emplace_back(p.energy_per_sample_j, p.wg_tpr);
    }
    std::vector<OperatingPoint> out;
    for (std::size_t idx : pareto_indices(energy_wg)) out.push_back(points[idx]);
    return out;
}

void write_points_csv(const std::filesystem::path& path,
                      const std::vector<OperatingPoint>& points) {
    std::vector<std::pair<double, double>> energy_wg;
    energy_wg.reserve(points.size());
    for (const OperatingPoint& p : points) energy_wg.emplace_back(p.energy_per_sample_j, p.wg_tpr);
    const std::vector<std::size_t> frontier = pareto_indices(energy_wg);
    std::vector<bool> on_frontier(points.size(), false);
    for (std::size_t idx : frontier) on_frontier[idx] = true;

    std::vector<std::vector<std::string>> rows;
    rows.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const OperatingPoint& p = points[i];
        auto aux = [&p](const char* key) {
            auto it = p.aux.find(key);
            return it == p.aux.end() ? std::string() : io::format_sig6(it->second);
        };
        rows.push_back({to_string(p.config.gate_mode), io::format_sig6(p.config.tau_h),
                        io::format_sig6(p.config.tau_delta), io::format_sig6(p.config.tau_risk),
                        io::format_sig6(p.config.tau_r), io::format_sig6(p.config.lambda_h),
                        io::format_sig6(p.config.lambda_delta),
                        io::format_sig6(p.energy_per_sample_j), io::format_sig6(p.routing_pct),
                        io::format_sig6(p.wg_tpr), aux("tpr_gap"), aux("macro_f1"),
                        std::to_string(p.n_samples), on_frontier[i] ? "1" : "0"});
    }
    io::write_csv(path,
                  {"gate_mode", "tau_h", "tau_delta", "tau_risk", "tau_r", "lambda_h",
                   "lambda_delta", "e_ecofair_j_per_sample", "routing_pct", "wg_tpr", "tpr_gap",
                   "macro_f1", "n_samples", "frontier"},
                  rows);
}

} // namespace ecofair::sweep

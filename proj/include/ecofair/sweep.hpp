#pragma once

#include "ecofair/harness.hpp"
#include "ecofair/types.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace ecofair::sweep {

// One routing configuration evaluated under the full CV protocol. Energy and
// worst-group TPR are pooled over the test folds (every sample appears in
// exactly one test fold), so total edge energy = energy_per_sample_j * n.
struct OperatingPoint {
    RoutingConfig config;
    double energy_per_sample_j = 0.0;
    double wg_tpr = 0.0;
    double routing_pct = 0.0;
    std::size_t n_samples = 0;
    std::map<std::string, double> aux; // macro_f1, tpr_gap, ...
};

// Threshold ranges; an empty axis means "keep the base config value".
// Cells iterate lexicographically over
// (tau_h, tau_delta, tau_risk, tau_r, lambda_h, lambda_delta).
struct SweepGrid {
    std::vector<double> tau_h;
    std::vector<double> tau_delta;
    std::vector<double> tau_risk;
    std::vector<double> tau_r;
    std::vector<double> lambda_h;
    std::vector<double> lambda_delta;
};

SweepGrid parse_sweep_grid(const nlohmann::json& j);
nlohmann::json sweep_grid_to_json(const SweepGrid& grid);

// One OperatingPoint per grid cell, reusing per-fold models (heads and risk
// calibration are threshold-independent). Deterministic cell order.
std::vector<OperatingPoint> grid_sweep(const Dataset& d,
                                       const std::vector<harness::PreparedFold>& folds,
                                       const harness::RunConfig& cfg, const SweepGrid& grid);

// Indices of points not dominated in the (energy minimised, wg_tpr maximised)
// plane: q dominates p iff energy(q) <= energy(p) and wg(q) >= wg(p) with at
// least one strict. Exact duplicates keep the first occurrence. Output is
// sorted by ascending energy (and therefore strictly increasing wg_tpr).
std::vector<std::size_t> pareto_indices(std::span<const std::pair<double, double>> energy_wg);

std::vector<OperatingPoint> pareto_front(std::span<const OperatingPoint> points);

// points CSV with a `frontier` boolean column; the artifact's stand-in for a
// frontier plot.
void write_points_csv(const std::filesystem::path& path,
                      const std::vector<OperatingPoint>& points);

} // namespace ecofair::sweep

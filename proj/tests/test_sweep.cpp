#include "ecofair/error.hpp"
#include "ecofair/rng.hpp"
#include "ecofair/sweep.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace ecofair;

namespace {

sweep::OperatingPoint point(double energy, double wg) {
    sweep::OperatingPoint p;
    p.energy_per_sample_j = energy;
    p.wg_tpr = wg;
    return p;
}

harness::RunConfig small_run_config(std::uint64_t seed = 3) {
    SynthSpec spec;
    spec.seed = seed;
    spec.n_samples = 260;
    spec.num_classes = 4;
    spec.n_localizations = 4;
    spec.n_subgroups = 2;
    spec.lite_noise = 1.4;
    spec.heavy_noise = 0.3;
    spec.lite_dim = 6;
    spec.heavy_dim = 8;
    harness::RunConfig cfg;
    cfg.source.synth = spec;
    cfg.folds = 3;
    cfg.seed = seed;
    cfg.fusion_cfg.epochs = 60;
    return cfg;
}

} // namespace

TEST_SUITE("sweep") {

TEST_CASE("frontier on the three-point reference case") {
    const std::vector<sweep::OperatingPoint> pts{point(1, 0.5), point(2, 0.7), point(3, 0.6)};
    const auto front = sweep::pareto_front(pts);
    REQUIRE(front.size() == 2);
    CHECK(front[0].energy_per_sample_j == 1);
    CHECK(front[0].wg_tpr == 0.5);
    CHECK(front[1].energy_per_sample_j == 2);
    CHECK(front[1].wg_tpr == 0.7);
}

TEST_CASE("a single point is its own frontier; empty input throws") {
    const std::vector<sweep::OperatingPoint> one{point(1.5, 0.4)};
    CHECK(sweep::pareto_front(one).size() == 1);
    CHECK_THROWS_AS(sweep::pareto_front(std::vector<sweep::OperatingPoint>{}), Error);
}

TEST_CASE("duplicates keep the first occurrence") {
    const std::vector<std::pair<double, double>> pts{{1.0, 0.5}, {1.0, 0.5}, {0.5, 0.2}};
    const auto idx = sweep::pareto_indices(pts);
    CHECK(idx == std::vector<std::size_t>{2, 0});
}

TEST_CASE("frontier matches the quadratic oracle on random instances") {
    Rng rng(314);
    for (int it = 0; it < 100; ++it) {
        const std::size_t n = 1 + rng.uniform_index(200);
        std::vector<std::pair<double, double>> pts(n);
        for (auto& p : pts) {
            // a coarse grid of values makes exact ties common
            p.first = double(rng.uniform_index(20)) / 4.0;
            p.second = double(rng.uniform_index(10)) / 9.0;
        }
        CHECK(sweep::pareto_indices(pts) == oracle::pareto_front(pts));
    }
}

TEST_CASE("frontier properties: mutual non-dominance, coverage, idempotence") {
    Rng rng(2718);
    std::vector<sweep::OperatingPoint> pts;
    for (int i = 0; i < 150; ++i) pts.push_back(point(rng.uniform(0, 4), rng.uniform01()));
    const auto front = sweep::pareto_front(pts);

    auto dominates = [](const sweep::OperatingPoint& q, const sweep::OperatingPoint& p) {
        return q.energy_per_sample_j <= p.energy_per_sample_j && q.wg_tpr >= p.wg_tpr &&
               (q.energy_per_sample_j < p.energy_per_sample_j || q.wg_tpr > p.wg_tpr);
    };
    for (std::size_t a = 0; a < front.size(); ++a) {
        for (std::size_t b = 0; b < front.size(); ++b) {
            if (a != b) CHECK_FALSE(dominates(front[a], front[b]));
        }
    }
    for (const auto& p : pts) {
        bool covered = false;
        for (const auto& f : front) {
            if (dominates(f, p) || (f.energy_per_sample_j == p.energy_per_sample_j &&
                                    f.wg_tpr == p.wg_tpr)) {
                covered = true;
                break;
            }
        }
        CHECK(covered);
    }
    for (std::size_t i = 1; i < front.size(); ++i) {
        CHECK(front[i].energy_per_sample_j > front[i - 1].energy_per_sample_j);
        CHECK(front[i].wg_tpr > front[i - 1].wg_tpr);
    }
    const auto again = sweep::pareto_front(front);
    REQUIRE(again.size() == front.size());
    for (std::size_t i = 0; i < front.size(); ++i) {
        CHECK(again[i].energy_per_sample_j == front[i].energy_per_sample_j);
        CHECK(again[i].wg_tpr == front[i].wg_tpr);
    }
}

TEST_CASE("grid extremes pin the routed fraction to 0 and 1") {
    const harness::RunConfig cfg = small_run_config();
    const Dataset d = harness::prepare_dataset(cfg);
    const auto folds = harness::prepare_folds(d, cfg);

    sweep::SweepGrid grid;
    grid.tau_h = {0.0, 1.01};
    grid.tau_delta = {2.0};
    grid.tau_risk = {2.0};
    const auto points = sweep::grid_sweep(d, folds, cfg, grid);
    REQUIRE(points.size() == 2);
    CHECK(points[0].routing_pct == 1.0); // tau_h = 0: every softmax output has entropy > 0
    CHECK(points[1].routing_pct == 0.0); // tau_h above 1 never fires
    CHECK(points[0].n_samples == d.size());
}

TEST_CASE("a one-cell grid equals a direct evaluation") {
    const harness::RunConfig cfg = small_run_config();
    const Dataset d = harness::prepare_dataset(cfg);
    const auto folds = harness::prepare_folds(d, cfg);

    sweep::SweepGrid grid;
    grid.tau_h = {cfg.routing.tau_h};
    const auto points = sweep::grid_sweep(d, folds, cfg, grid);
    REQUIRE(points.size() == 1);

    const harness::RunReport report = harness::run_cv(cfg, d, folds);
    for (const harness::MetricsRow& row : report.rows) {
        if (row.arm == harness::Arm::Ecofair && row.fold_label == "pooled") {
            CHECK(points[0].routing_pct == *row.routing_pct);
            CHECK(points[0].energy_per_sample_j == *row.e_per_sample_j);
            CHECK(points[0].wg_tpr == *row.tpr_worst);
        }
    }
}

TEST_CASE("refining a grid keeps previously attainable points") {
    const harness::RunConfig cfg = small_run_config();
    const Dataset d = harness::prepare_dataset(cfg);
    const auto folds = harness::prepare_folds(d, cfg);

    sweep::SweepGrid coarse;
    coarse.tau_h = {0.3, 0.7};
    sweep::SweepGrid fine;
    fine.tau_h = {0.3, 0.5, 0.7};
    const auto coarse_pts = sweep::grid_sweep(d, folds, cfg, coarse);
    const auto fine_pts = sweep::grid_sweep(d, folds, cfg, fine);
    REQUIRE(coarse_pts.size() == 2);
    REQUIRE(fine_pts.size() == 3);
    CHECK(coarse_pts[0].energy_per_sample_j == fine_pts[0].energy_per_sample_j);
    CHECK(coarse_pts[0].wg_tpr == fine_pts[0].wg_tpr);
    CHECK(coarse_pts[1].energy_per_sample_j == fine_pts[2].energy_per_sample_j);
    CHECK(coarse_pts[1].wg_tpr == fine_pts[2].wg_tpr);
}

TEST_CASE("points CSV carries a frontier column") {
    const std::vector<sweep::OperatingPoint> pts{point(1, 0.5), point(2, 0.7), point(3, 0.6)};
    test::TempDir dir("points");
    sweep::write_points_csv(dir / "points.csv", pts);
    const auto table = io::read_csv(dir / "points.csv");
    REQUIRE(table.rows.size() == 3);
    const std::size_t frontier_col = table.column("frontier");
    CHECK(table.rows[0][frontier_col] == "1");
    CHECK(table.rows[1][frontier_col] == "1");
    CHECK(table.rows[2][frontier_col] == "0");
}

} // TEST_SUITE

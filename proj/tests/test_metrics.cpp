#include "ecofair/error.hpp"
#include "ecofair/metrics.hpp"
#include "ecofair/rng.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace ecofair;

TEST_SUITE("metrics") {

TEST_CASE("argmax breaks ties toward the lowest class index") {
    CHECK(metrics::argmax_class(std::vector<double>{0.2, 0.5, 0.3}) == 1);
    CHECK(metrics::argmax_class(std::vector<double>{0.4, 0.4, 0.2}) == 0);
    CHECK(metrics::argmax_class(std::vector<double>{0.1, 0.45, 0.45}) == 1);
}

TEST_CASE("confusion counts true class by predicted class") {
    const std::vector<std::size_t> labels{0, 0, 1, 1, 2};
    const std::vector<std::size_t> perfect{0, 0, 1, 1, 2};
    auto m = metrics::confusion(labels, perfect, 3);
    CHECK(m[0][0] == 2);
    CHECK(m[1][1] == 2);
    CHECK(m[2][2] == 1);
    CHECK(m[0][1] == 0);

    const std::vector<std::size_t> all_zero{0, 0, 0, 0, 0};
    m = metrics::confusion(labels, all_zero, 3);
    CHECK(m[0][0] + m[1][0] + m[2][0] == 5);
    CHECK(m[1][1] == 0);

    CHECK_THROWS_AS(metrics::confusion(labels, std::vector<std::size_t>{0, 1}, 3), Error);
    CHECK_THROWS_AS(metrics::confusion(std::vector<std::size_t>{0, 7}, std::vector<std::size_t>{0, 1}, 3), Error);
}

TEST_CASE("macro F1 matches the hand-computed binary case") {
    // confusion [[8,2],[4,6]]
    std::vector<std::size_t> labels, preds;
    auto push = [&](std::size_t l, std::size_t p, int n) {
        for (int i = 0; i < n; ++i) {
            labels.push_back(l);
            preds.push_back(p);
        }
    };
    push(0, 0, 8);
    push(0, 1, 2);
    push(1, 0, 4);
    push(1, 1, 6);
    const auto m = metrics::confusion(labels, preds, 2);
    CHECK(metrics::macro_f1(m) == doctest::Approx(0.696969696969697).epsilon(1e-12));
    CHECK(metrics::balanced_accuracy(m) == doctest::Approx(0.7).epsilon(1e-12));

    const auto perfect = metrics::confusion(std::vector<std::size_t>{0, 1, 2}, std::vector<std::size_t>{0, 1, 2}, 3);
    CHECK(metrics::macro_f1(perfect) == 1.0);
    CHECK(metrics::balanced_accuracy(perfect) == 1.0);
}

TEST_CASE("a class that is never predicted nor present contributes zero F1") {
    // three classes, class 2 absent everywhere
    const auto m = metrics::confusion(std::vector<std::size_t>{0, 0, 1, 1}, std::vector<std::size_t>{0, 1, 1, 0}, 3);
    const double f1_0 = 2.0 * 0.5 * 0.5 / 1.0;
    CHECK(metrics::macro_f1(m) == doctest::Approx((f1_0 + f1_0 + 0.0) / 3.0));
    // balanced accuracy excludes the empty class from the mean
    CHECK(metrics::balanced_accuracy(m) == doctest::Approx(0.5));
}

TEST_CASE("uniform random predictions land near 1/C balanced accuracy") {
    Rng rng(31);
    const std::size_t c = 5, n = 5000;
    std::vector<std::size_t> labels(n), preds(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = rng.uniform_index(c);
        preds[i] = rng.uniform_index(c);
    }
    CHECK(metrics::balanced_accuracy(metrics::confusion(labels, preds, c)) ==
          doctest::Approx(1.0 / c).epsilon(0.25)); // +-0.05 absolute
}

TEST_CASE("malignant recall is binarised over the malignant set") {
    const ClassTaxonomy t = test::ham_style_taxonomy(); // malignant {4,5,6}
    // a malignant sample predicted as a *different* malignant class still counts
    CHECK(metrics::malignant_recall(std::vector<std::size_t>{4, 5, 6}, std::vector<std::size_t>{5, 6, 4}, t) == 1.0);
    CHECK(metrics::malignant_recall(std::vector<std::size_t>{4, 4, 4, 4}, std::vector<std::size_t>{4, 4, 4, 0}, t) == doctest::Approx(0.75));
    CHECK_THROWS_AS(metrics::malignant_recall(std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{0, 1}, t), Error);
}

TEST_CASE("fairness on one and two subgroups") {
    const ClassTaxonomy t = test::binary_taxonomy();
    std::vector<std::size_t> labels{1, 1, 1, 1};
    std::vector<std::size_t> preds{1, 0, 1, 1};
    std::vector<std::optional<std::string>> one_group{"g", "g", "g", "g"};
    auto r = metrics::fairness(labels, preds, one_group, t);
    CHECK(r.per_subgroup.size() == 1);
    CHECK(r.tpr_mean == r.tpr_worst);
    CHECK(r.tpr_gap == 0.0);

    // group a: TPR 0.8, group b: TPR 0.6
    labels.clear();
    preds.clear();
    std::vector<std::optional<std::string>> groups;
    for (int i = 0; i < 5; ++i) {
        labels.push_back(1);
        preds.push_back(i < 4 ? 1 : 0);
        groups.emplace_back("a");
    }
    for (int i = 0; i < 5; ++i) {
        labels.push_back(1);
        preds.push_back(i < 3 ? 1 : 0);
        groups.emplace_back("b");
    }
    r = metrics::fairness(labels, preds, groups, t);
    CHECK(r.tpr_mean == doctest::Approx(0.7));
    CHECK(r.tpr_worst == doctest::Approx(0.6));
    CHECK(r.tpr_gap == doctest::Approx(0.2));
}

TEST_CASE("subgroups without malignant positives are excluded and reported") {
    const ClassTaxonomy t = test::binary_taxonomy();
    const std::vector<std::size_t> labels{1, 1, 0, 0};
    const std::vector<std::size_t> preds{1, 1, 0, 0};
    const std::vector<std::optional<std::string>> groups{"pos", "pos", "neg_only", std::nullopt};
    const auto r = metrics::fairness(labels, preds, groups, t);
    CHECK(r.per_subgroup.size() == 1);
    REQUIRE(r.excluded.size() == 1);
    CHECK(r.excluded[0].subgroup == "neg_only");
    CHECK(r.excluded[0].count == 1);
    CHECK(r.missing_subgroup_count == 1);

    const std::vector<std::optional<std::string>> all_neg{"x", "x", "x", "x"};
    CHECK_THROWS_AS(metrics::fairness(std::vector<std::size_t>{0, 0, 0, 0}, preds, all_neg, t), Error);
}

TEST_CASE("fairness deltas carry improvement-positive signs") {
    metrics::FairnessReport eco, base;
    eco.per_subgroup = {{"a", 0.6, 5}, {"b", 0.9, 5}};
    base.per_subgroup = {{"a", 0.623, 5}, {"b", 0.9, 5}};
    eco.tpr_worst = 0.6;
    base.tpr_worst = 0.623;
    eco.tpr_gap = 0.10;
    base.tpr_gap = 0.30;
    const auto d = metrics::fairness_delta(eco, base);
    CHECK(d.wg_tpr == doctest::Approx(-0.023));
    CHECK(d.gap == doctest::Approx(0.20));

    const auto zero = metrics::fairness_delta(eco, eco);
    CHECK(zero.wg_tpr == 0.0);
    CHECK(zero.gap == 0.0);

    metrics::FairnessReport other;
    other.per_subgroup = {{"a", 0.5, 5}};
    CHECK_THROWS_AS(metrics::fairness_delta(eco, other), Error);
}

TEST_CASE("fold aggregation uses the sample standard deviation") {
    auto ms = metrics::aggregate_folds(std::vector<double>{0.5, 0.5, 0.5});
    CHECK(ms.mean == doctest::Approx(0.5));
    CHECK(ms.std == 0.0);
    ms = metrics::aggregate_folds(std::vector<double>{0.4, 0.6});
    CHECK(ms.mean == doctest::Approx(0.5));
    CHECK(ms.std == doctest::Approx(0.14142135623730948).epsilon(1e-12));
    ms = metrics::aggregate_folds(std::vector<double>{0.42});
    CHECK(ms.mean == doctest::Approx(0.42));
    CHECK(ms.std == 0.0);
    CHECK_THROWS_AS(metrics::aggregate_folds(std::vector<double>{}), Error);
}

TEST_CASE("metrics agree with the brute-force oracle on random instances") {
    Rng rng(2024);
    const ClassTaxonomy t7 = test::ham_style_taxonomy();
    for (int it = 0; it < 100; ++it) {
        const std::size_t c = 2 + rng.uniform_index(6);
        const std::size_t n = 1 + rng.uniform_index(200);
        std::vector<std::size_t> labels(n), preds(n);
        std::vector<std::optional<std::string>> groups(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = rng.uniform_index(c);
            preds[i] = rng.uniform_index(c);
            const std::size_t g = rng.uniform_index(5);
            if (g < 4) groups[i] = "g" + std::to_string(g);
        }
        const auto cm = metrics::confusion(labels, preds, c);
        CHECK(cm == oracle::confusion(labels, preds, c));
        CHECK(metrics::macro_f1(cm) ==
              doctest::Approx(oracle::macro_f1(labels, preds, c)).epsilon(1e-12));
        CHECK(metrics::balanced_accuracy(cm) ==
              doctest::Approx(oracle::balanced_accuracy(labels, preds, c)).epsilon(1e-12));

        ClassTaxonomy t;
        if (c == 7) {
            t = t7;
        } else {
            for (std::size_t k = 0; k < c; ++k) t.class_names.push_back("c" + std::to_string(k));
            for (std::size_t k = 0; k < c; ++k) {
                if (k < (c + 1) / 2) t.safe_set.push_back(k);
                else t.danger_set.push_back(k);
            }
            t.malignant_set = t.danger_set;
            t = validate_taxonomy(t);
        }
        const auto expect = oracle::subgroup_tprs(labels, preds, groups, t);
        if (!expect.has_value()) {
            CHECK_THROWS_AS(metrics::fairness(labels, preds, groups, t), Error);
            continue;
        }
        const auto got = metrics::fairness(labels, preds, groups, t);
        REQUIRE(got.per_subgroup.size() == expect->tpr.size());
        for (const auto& g : got.per_subgroup) {
            CHECK(g.tpr == doctest::Approx(expect->tpr.at(g.subgroup)).epsilon(1e-12));
        }
        CHECK(got.tpr_mean == doctest::Approx(expect->mean).epsilon(1e-12));
        CHECK(got.tpr_worst == doctest::Approx(expect->worst).epsilon(1e-12));
        CHECK(got.tpr_gap == doctest::Approx(expect->gap).epsilon(1e-12));
    }
}

TEST_CASE("adding a subgroup never raises the worst TPR nor shrinks the gap") {
    const ClassTaxonomy t = test::binary_taxonomy();
    Rng rng(909);
    for (int it = 0; it < 200; ++it) {
        const std::size_t n = 20 + rng.uniform_index(60);
        std::vector<std::size_t> labels(n), preds(n);
        std::vector<std::optional<std::string>> groups(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = rng.uniform_index(2);
            preds[i] = rng.uniform_index(2);
            groups[i] = "g" + std::to_string(rng.uniform_index(3));
        }
        std::optional<metrics::FairnessReport> base;
        try {
            base = metrics::fairness(labels, preds, groups, t);
        } catch (const Error&) {
            continue;
        }
        // append a fresh subgroup with at least one malignant positive
        std::vector<std::size_t> labels2 = labels, preds2 = preds;
        auto groups2 = groups;
        const std::size_t extra = 1 + rng.uniform_index(6);
        bool has_positive = false;
        for (std::size_t i = 0; i < extra; ++i) {
            const std::size_t label = (i == 0) ? 1 : rng.uniform_index(2);
            has_positive |= label == 1;
            labels2.push_back(label);
            preds2.push_back(rng.uniform_index(2));
            groups2.emplace_back("fresh");
        }
        REQUIRE(has_positive);
        const auto grown = metrics::fairness(labels2, preds2, groups2, t);
        CHECK(grown.tpr_worst <= base->tpr_worst + 1e-15);
        CHECK(grown.tpr_gap >= base->tpr_gap - 1e-15);
    }
}

TEST_CASE("metrics are invariant under sample permutation") {
    Rng rng(606);
    const std::size_t c = 4, n = 120;
    std::vector<std::size_t> labels(n), preds(n), order(n);
    std::vector<std::optional<std::string>> groups(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = rng.uniform_index(c);
        preds[i] = rng.uniform_index(c);
        groups[i] = "g" + std::to_string(rng.uniform_index(3));
        order[i] = i;
    }
    ClassTaxonomy t;
    t.class_names = {"a", "b", "c", "d"};
    t.safe_set = {0, 1};
    t.danger_set = {2, 3};
    t.malignant_set = {2, 3};
    t = validate_taxonomy(t);
    const auto base_cm = metrics::confusion(labels, preds, c);
    const auto base_fair = metrics::fairness(labels, preds, groups, t);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    std::vector<std::size_t> pl(n), pp(n);
    std::vector<std::optional<std::string>> pg(n);
    for (std::size_t i = 0; i < n; ++i) {
        pl[i] = labels[order[i]];
        pp[i] = preds[order[i]];
        pg[i] = groups[order[i]];
    }
    CHECK(metrics::confusion(pl, pp, c) == base_cm);
    const auto fair = metrics::fairness(pl, pp, pg, t);
    CHECK(fair.tpr_mean == base_fair.tpr_mean);
    CHECK(fair.tpr_worst == base_fair.tpr_worst);
    CHECK(fair.tpr_gap == base_fair.tpr_gap);
}

} // TEST_SUITE

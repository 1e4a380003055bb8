#include "ecofair/error.hpp"
#include "ecofair/routing.hpp"
#include "ecofair/rng.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace ecofair;

namespace {

RoutingConfig trigger_cfg(double tau_h, double tau_delta, double tau_risk) {
    RoutingConfig cfg;
    cfg.gate_mode = GateMode::Trigger;
    cfg.tau_h = tau_h;
    cfg.tau_delta = tau_delta;
    cfg.tau_risk = tau_risk;
    return cfg;
}

} // namespace

TEST_SUITE("routing") {

TEST_CASE("entropy extremes and a frozen reference value") {
    CHECK(routing::entropy(PredictiveDistribution{{1.0, 0.0, 0.0}}) == 0.0);
    CHECK(routing::entropy(PredictiveDistribution{std::vector<double>(7, 1.0 / 7)}) ==
          doctest::Approx(1.945910).epsilon(1e-6));
    // independently summed: -(0.5 ln 0.5 + 0.3 ln 0.3 + 0.2 ln 0.2)
    CHECK(routing::entropy(PredictiveDistribution{{0.5, 0.3, 0.2}}) ==
          doctest::Approx(1.0296530140645737).epsilon(1e-12));
}

TEST_CASE("normalised entropy lands in [0,1] with exact extremes") {
    CHECK(routing::norm_entropy(PredictiveDistribution{std::vector<double>(5, 0.2)}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(routing::norm_entropy(PredictiveDistribution{{0.0, 1.0}}) == 0.0);
    CHECK(routing::norm_entropy(PredictiveDistribution{{0.5, 0.5}}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(routing::norm_entropy(PredictiveDistribution{{1.0}}), Error);
}

TEST_CASE("safe-danger gap sums the partition masses") {
    const ClassTaxonomy t = test::ham_style_taxonomy(); // safe {0..3}, danger {4..6}
    auto g = routing::safe_danger_gap(PredictiveDistribution{{1, 0, 0, 0, 0, 0, 0}}, t);
    CHECK(g.p_safe == 1.0);
    CHECK(g.p_danger == 0.0);
    CHECK(g.delta == 1.0);

    g = routing::safe_danger_gap(PredictiveDistribution{{0.25, 0.25, 0, 0, 0.5, 0, 0}}, t);
    CHECK(g.delta == doctest::Approx(0.0));

    ClassTaxonomy three;
    three.class_names = {"s1", "s2", "d1"};
    three.safe_set = {0, 1};
    three.danger_set = {2};
    three.malignant_set = {2};
    three = validate_taxonomy(three);
    g = routing::safe_danger_gap(PredictiveDistribution{{0.6, 0.1, 0.3}}, three);
    CHECK(g.p_safe == doctest::Approx(0.7));
    CHECK(g.p_danger == doctest::Approx(0.3));
    CHECK(g.delta == doctest::Approx(0.4));
}

TEST_CASE("ambiguity is one minus the absolute gap") {
    CHECK(routing::ambiguity(1.0) == 0.0);
    CHECK(routing::ambiguity(-1.0) == 0.0);
    CHECK(routing::ambiguity(0.0) == 1.0);
    CHECK(routing::ambiguity(0.4) == doctest::Approx(0.6));
}

TEST_CASE("routing score is the weighted combination") {
    RoutingConfig cfg;
    cfg.lambda_h = 0.5;
    cfg.lambda_delta = 0.5;
    CHECK(routing::routing_score(0.8, 0.6, cfg) == doctest::Approx(0.7));
    cfg.lambda_h = 1.0;
    cfg.lambda_delta = 0.0;
    CHECK(routing::routing_score(0.8, 0.6, cfg) == doctest::Approx(0.8));
    CHECK(routing::routing_score(0.0, 0.0, cfg) == 0.0);
}

TEST_CASE("trigger gate fires per clause and records reasons") {
    routing::RoutingSignals s;
    s.norm_entropy = 0.9;
    s.ambiguity = 0.1;
    s.tab_risk = 0.1;
    auto d = routing::gate("x", s, trigger_cfg(0.7, 0.8, 0.9));
    CHECK(d.gate);
    CHECK(d.trigger_reason.entropy);
    CHECK_FALSE(d.trigger_reason.ambiguity);
    CHECK_FALSE(d.trigger_reason.risk_override);
    CHECK_FALSE(d.score.has_value());

    // all signals exactly at their thresholds: strict > keeps the gate shut,
    // the inclusive risk comparison opens it
    s.norm_entropy = 0.7;
    s.ambiguity = 0.8;
    s.tab_risk = 0.89999;
    d = routing::gate("x", s, trigger_cfg(0.7, 0.8, 0.9));
    CHECK_FALSE(d.gate);
    CHECK(d.trigger_reason.label().empty());

    s.tab_risk = 0.9;
    d = routing::gate("x", s, trigger_cfg(0.7, 0.8, 0.9));
    CHECK(d.gate);
    CHECK(d.trigger_reason.label() == "risk_override");
}

TEST_CASE("score gate compares the combined score against tau_r") {
    RoutingConfig cfg;
    cfg.gate_mode = GateMode::Score;
    cfg.lambda_h = 0.5;
    cfg.lambda_delta = 0.5;
    cfg.tau_r = 0.65;
    cfg.tau_risk = 2.0;
    routing::RoutingSignals s;
    s.norm_entropy = 0.8;
    s.ambiguity = 0.6;
    s.tab_risk = 0.0;
    auto d = routing::gate("x", s, cfg);
    REQUIRE(d.score.has_value());
    CHECK(*d.score == doctest::Approx(0.7));
    CHECK(d.gate);
    CHECK(d.trigger_reason.label() == "score");

    cfg.tau_r = 0.7; // strict comparison at the boundary
    d = routing::gate("x", s, cfg);
    CHECK_FALSE(d.gate);
}

TEST_CASE("score mode with lambda_delta zero reduces to entropy gating") {
    RoutingConfig cfg;
    cfg.gate_mode = GateMode::Score;
    cfg.lambda_h = 1.0;
    cfg.lambda_delta = 0.0;
    cfg.tau_r = 0.5;
    cfg.tau_risk = 1.5; // override disabled
    Rng rng(7);
    for (int it = 0; it < 500; ++it) {
        routing::RoutingSignals s;
        s.norm_entropy = rng.uniform01();
        s.ambiguity = rng.uniform01();
        s.tab_risk = rng.uniform01();
        const auto d = routing::gate("x", s, cfg);
        CHECK(d.gate == (cfg.lambda_h * s.norm_entropy > cfg.tau_r));
    }
}

TEST_CASE("route_sample stitches risk and image signals together") {
    const ClassTaxonomy t = test::binary_taxonomy();
    risk::RiskModel m;
    m.a_min = 0.0;
    m.a_max = 100.0;
    m.mal_rate = {{"face", 0.5}};
    m.max_rate = 0.5;
    m.fallback_rate = 0.1;

    // confident benign prediction, low metadata risk: stays on the lite path
    Sample s = test::make_sample("low", 0, 10.0, "face");
    auto d = routing::route_sample(s, PredictiveDistribution{{1.0, 0.0}}, m, t,
                                   trigger_cfg(0.5, 0.99, 0.7));
    CHECK_FALSE(d.gate);
    CHECK(d.entropy == 0.0);
    CHECK(d.delta == 1.0);
    CHECK(d.tab_risk == doctest::Approx(0.1));

    // same confident prediction, risky metadata: the override escalates
    s = test::make_sample("high", 0, 100.0, "face");
    d = routing::route_sample(s, PredictiveDistribution{{1.0, 0.0}}, m, t,
                              trigger_cfg(0.5, 0.99, 0.7));
    CHECK(d.gate);
    CHECK(d.trigger_reason.label() == "risk_override");

    // a uniform lite prediction always escalates while tau_h < 1
    d = routing::route_sample(s, PredictiveDistribution{{0.5, 0.5}}, m, t,
                              trigger_cfg(0.99, 2.0, 2.0));
    CHECK(d.gate);
    CHECK(d.trigger_reason.entropy);
}

TEST_CASE("entropy bounds, ambiguity bounds and permutation consistency hold") {
    const ClassTaxonomy t7 = test::ham_style_taxonomy();
    const ClassTaxonomy t2 = test::binary_taxonomy();
    Rng rng(1234);
    for (int it = 0; it < 2000; ++it) {
        const ClassTaxonomy& t = (it % 2 == 0) ? t7 : t2;
        const std::size_t c = t.num_classes();
        const auto p = validate_distribution(test::random_distribution(rng, c));
        const double h = routing::entropy(p);
        CHECK(h >= 0.0);
        CHECK(h <= std::log(double(c)) + 1e-12);
        const auto g = routing::safe_danger_gap(p, t);
        const double a = routing::ambiguity(g.delta);
        CHECK(a >= -1e-12);
        CHECK(a <= 1.0 + 1e-12);
        CHECK(g.p_safe + g.p_danger == doctest::Approx(1.0).epsilon(1e-9));

        // permute classes together with the set memberships
        std::vector<std::size_t> perm(c);
        for (std::size_t i = 0; i < c; ++i) perm[i] = i;
        for (std::size_t i = c; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
        ClassTaxonomy pt;
        pt.class_names.resize(c);
        std::vector<double> pp(c);
        for (std::size_t i = 0; i < c; ++i) {
            pt.class_names[perm[i]] = t.class_names[i];
            pp[perm[i]] = p.probs[i];
        }
        for (std::size_t i : t.safe_set) pt.safe_set.push_back(perm[i]);
        for (std::size_t i : t.danger_set) pt.danger_set.push_back(perm[i]);
        for (std::size_t i : t.malignant_set) pt.malignant_set.push_back(perm[i]);
        pt = validate_taxonomy(pt);
        const PredictiveDistribution p2{pp};
        CHECK(routing::entropy(p2) == doctest::Approx(h).epsilon(1e-12));
        const auto g2 = routing::safe_danger_gap(p2, pt);
        CHECK(g2.delta == doctest::Approx(g.delta).epsilon(1e-12));
    }
}

TEST_CASE("gate is monotone in every signal") {
    Rng rng(555);
    for (int it = 0; it < 2000; ++it) {
        const RoutingConfig cfg =
            trigger_cfg(rng.uniform01(), rng.uniform01(), rng.uniform01());
        routing::RoutingSignals s;
        s.norm_entropy = rng.uniform01();
        s.ambiguity = rng.uniform01();
        s.tab_risk = rng.uniform01();
        const bool before = routing::gate("x", s, cfg).gate;
        routing::RoutingSignals bumped = s;
        switch (rng.uniform_index(3)) {
        case 0: bumped.norm_entropy += rng.uniform01() * (1.0 - bumped.norm_entropy); break;
        case 1: bumped.ambiguity += rng.uniform01() * (1.0 - bumped.ambiguity); break;
        default: bumped.tab_risk += rng.uniform01() * (1.0 - bumped.tab_risk); break;
        }
        const bool after = routing::gate("x", bumped, cfg).gate;
        if (before) CHECK(after);
    }
}

TEST_CASE("lowering thresholds never shrinks the routed set") {
    Rng rng(888);
    for (int it = 0; it < 1000; ++it) {
        routing::RoutingSignals s;
        s.norm_entropy = rng.uniform01();
        s.ambiguity = rng.uniform01();
        s.tab_risk = rng.uniform01();
        RoutingConfig hi = trigger_cfg(rng.uniform01(), rng.uniform01(), rng.uniform01());
        RoutingConfig lo = hi;
        lo.tau_h *= rng.uniform01();
        lo.tau_delta *= rng.uniform01();
        lo.tau_risk *= rng.uniform01();
        if (routing::gate("x", s, hi).gate) CHECK(routing::gate("x", s, lo).gate);
    }
}

} // TEST_SUITE

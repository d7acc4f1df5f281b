#include <doctest.h>

#include <cmath>

#include "pdn/baseline/optimize.hpp"
#include "pdn/error.hpp"
#include "support/fixtures.hpp"

using namespace pdn;
using namespace pdn::baseline;

namespace {

// 1x2 interposer, one 1x1 chiplet: three genes, 1331 layouts.
Floorplan tiny_floorplan() {
    Floorplan fp = test::make_floorplan({1, 2}, {{0, 1}});
    fp.chiplets.push_back(test::make_chiplet("die", {0, 0}, {1, 1}));
    fp.probes.push_back({"die", {0, 0}});
    return fp;
}

freq::TargetImpedanceSpec tiny_target() {
    freq::TargetImpedanceSpec t;
    t.p_max = 2.5;
    return t;
}

// Smooth synthetic cost with a unique optimum, checking feasibility.
CostFn bowl(const Floorplan& fp) {
    return [fp](const DecapLayout& l) {
        CHECK_NOTHROW(l.validate(fp));
        double c = 0.0;
        int k = 0;
        for (const UdcSite& s : all_sites(fp)) {
            const int target = (k++ * 3) % (kMaxLevel + 1);
            const int v = level_at(l, s);
            c += (v - target) * (v - target);
        }
        return c;
    };
}

bool non_increasing(const std::vector<double>& h) {
    for (std::size_t i = 1; i < h.size(); ++i) {
        if (h[i] > h[i - 1]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("genome: round trip and infeasible genes decode to zero") {
    Floorplan fp = test::toy_floorplan();
    fp.interposer_space(0, 1) = 0;
    fp.chiplets[0].space(1, 1) = 0;
    std::vector<int> g(8, 7);
    const DecapLayout l = decode_genome(fp, g);
    CHECK_NOTHROW(l.validate(fp));
    CHECK(l.mim(0, 1) == 0);
    CHECK(l.mos[0](1, 1) == 0);
    CHECK(l.mim(0, 0) == 7);
    CHECK(decode_genome(fp, encode_genome(fp, l)) == l);
    CHECK_THROWS_AS(decode_genome(fp, std::vector<int>(7, 0)), InvalidArgument);
}

TEST_CASE("ga: one generation returns the best initial individual") {
    const Floorplan fp = test::toy_floorplan();
    std::vector<double> seen;
    CostFn base = bowl(fp);
    CostFn cost = [&](const DecapLayout& l) {
        seen.push_back(base(l));
        return seen.back();
    };
    BaselineConfig cfg;
    cfg.budget = cfg.ga.population;
    cfg.seed = 4;
    const BaselineResult r = ga_optimize(fp, cost, cfg);
    CHECK(r.evaluations == cfg.ga.population);
    CHECK(r.best_cost == *std::min_element(seen.begin(), seen.end()));
}

TEST_CASE("ga/da: determinism, monotone history, no stale best") {
    const Floorplan fp = test::toy_floorplan();
    for (Method m : {Method::GA, Method::DA}) {
        BaselineConfig cfg;
        cfg.method = m;
        cfg.budget = 700;
        cfg.seed = 12;
        const BaselineResult a = optimize(fp, bowl(fp), cfg);
        const BaselineResult b = optimize(fp, bowl(fp), cfg);
        CHECK(a.history == b.history);
        CHECK(a.best_layout == b.best_layout);
        CHECK(a.evaluations == cfg.budget);
        CHECK(a.history.size() == static_cast<std::size_t>(cfg.budget));
        CHECK(non_increasing(a.history));
        CHECK(bowl(fp)(a.best_layout) == a.best_cost);
        CHECK(a.best_cost < a.history.front());
    }
}

TEST_CASE("da: zero temperature never accepts a worse state") {
    const Floorplan fp = test::toy_floorplan();
    BaselineConfig cfg;
    cfg.method = Method::DA;
    cfg.da.initial_temp = 0.0;
    cfg.budget = 300;
    cfg.seed = 3;
    const BaselineResult r = da_optimize(fp, bowl(fp), cfg);
    REQUIRE(!r.current.empty());
    CHECK(non_increasing(r.current));
    // Hill climbing on a convex bowl reaches the optimum.
    CHECK(r.best_cost == 0.0);
}

TEST_CASE("baseline: config validation") {
    BaselineConfig c;
    CHECK_NOTHROW(c.validate());
    c.budget = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.ga.mutation = 1.5;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.da.visit = 3.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("ga/da: against exhaustive enumeration on the tiny case") {
    const Floorplan fp = tiny_floorplan();
    rl::FreqEvaluator ev(fp, PdnParams{}, tiny_target(), {}, freq::default_frequency_grid());
    const CostFn cost = freq_cost(ev);

    double optimum = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= kMaxLevel; ++a) {
        for (int b = 0; b <= kMaxLevel; ++b) {
            for (int c = 0; c <= kMaxLevel; ++c) {
                optimum = std::min(optimum, cost(decode_genome(fp, {a, b, c})));
            }
        }
    }
    REQUIRE(optimum < 0.0);  // a compliant layout exists

    BaselineConfig cfg;
    cfg.budget = 400;
    cfg.seed = 1;
    cfg.method = Method::GA;
    const BaselineResult ga = optimize(fp, cost, cfg);
    CHECK(ga.best_cost >= optimum);
    CHECK(cost(ga.best_layout) == ga.best_cost);

    cfg.method = Method::DA;
    const BaselineResult da = optimize(fp, cost, cfg);
    CHECK(da.best_cost >= optimum);
    CHECK(da.best_cost <= optimum + 0.05 * std::abs(optimum));
    CHECK(cost(da.best_layout) == da.best_cost);
}

#include <doctest.h>

#include <cmath>

#include "pdn/error.hpp"
#include "pdn/freq/target.hpp"
#include "support/fixtures.hpp"

using namespace pdn;
using namespace pdn::freq;

namespace {

// vdd = 1 V, 5 % ripple, 35 mOhm flat: i_ref = 0.05 / 0.035 A.
TargetImpedanceSpec mask_35m() {
    TargetImpedanceSpec s;
    s.vdd = 1.0;
    s.ripple = 0.05;
    s.p_max = 2.0 * s.vdd * (s.vdd * s.ripple / 0.035);
    s.t_r = 0.35 / 3.4e9;
    return s;
}

circuit::AcSolution flat_solution(const std::vector<double>& f, const TargetImpedanceSpec& spec,
                                  double scale, int ports) {
    circuit::AcSolution ac;
    ac.frequencies = f;
    for (int p = 0; p < ports; ++p) {
        ac.ports.push_back("p" + std::to_string(p));
        std::vector<circuit::Complex> z;
        for (double x : f) z.emplace_back(scale * target_impedance(spec, x), 0.0);
        ac.z.push_back(z);
    }
    return ac;
}

}  // namespace

TEST_CASE("target: derived quantities") {
    TargetImpedanceSpec s = mask_35m();
    CHECK(s.i_ref() == s.p_max / (2 * s.vdd));
    CHECK(s.f_knee() == doctest::Approx(3.4e9).epsilon(1e-14));
    CHECK(s.flat_impedance() == doctest::Approx(0.035).epsilon(1e-14));
    TargetImpedanceSpec bad = s;
    bad.ripple = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("target: flat region, slope, and continuity") {
    TargetImpedanceSpec s = mask_35m();
    CHECK(target_impedance(s, 1e9) == doctest::Approx(0.035).epsilon(1e-14));
    CHECK(target_impedance(s, 10 * s.f_knee()) == doctest::Approx(0.35).epsilon(1e-14));
    CHECK(target_impedance(s, s.f_knee()) == s.flat_impedance());
    const double above = target_impedance(s, std::nextafter(s.f_knee(), 1e12));
    CHECK(std::abs(above - s.flat_impedance()) < 1e-12);
    double prev = 0.0;
    for (double f : default_frequency_grid()) {
        double z = target_impedance(s, f);
        CHECK(z >= prev);
        prev = z;
    }
}

TEST_CASE("frequency grid: 100 points per decade from 0.1 to 20 GHz") {
    auto f = default_frequency_grid();
    CHECK(f.front() == 0.1e9);
    CHECK(f.back() == 20e9);
    CHECK(f[100] == doctest::Approx(1e9).epsilon(1e-12));
    CHECK(f[200] == doctest::Approx(10e9).epsilon(1e-12));
    CHECK(f.size() == 232);
}

TEST_CASE("mask violation: strictly below and single violation") {
    TargetImpedanceSpec s = mask_35m();
    auto f = default_frequency_grid();
    auto below = flat_solution(f, s, 0.5, 2);
    auto ex = mask_violation(below, s);
    CHECK(is_compliant(ex));
    for (double e : ex) CHECK(e < 0.0);

    auto one = flat_solution(f, s, 1.0, 2);
    one.z[1][17] += 0.01;
    ex = mask_violation(one, s);
    CHECK(ex[17] == doctest::Approx(0.01).epsilon(1e-9));
    CHECK_FALSE(is_compliant(ex));

    circuit::AcSolution none;
    none.frequencies = f;
    CHECK_THROWS_AS(mask_violation(none, s), InvalidArgument);
}

TEST_CASE("freq reward: economy branch and violation branch") {
    Floorplan fp = test::toy_floorplan();
    RewardWeights w;
    std::vector<double> ok(10, -0.001);
    CHECK(freq_reward(ok, DecapLayout::empty_for(fp), fp, w) == 1.0);
    CHECK(freq_reward(ok, DecapLayout::uniform_for(fp, kMaxLevel), fp, w) == doctest::Approx(0.0));

    std::vector<double> bad(10, -0.2);
    bad[1] = bad[4] = bad[8] = 0.01;
    CHECK(freq_reward(bad, DecapLayout::empty_for(fp), fp, w) == doctest::Approx(-0.03));
    // violation branch ignores decap totals
    CHECK(freq_reward(bad, DecapLayout::uniform_for(fp, 7), fp, w) ==
          freq_reward(bad, DecapLayout::empty_for(fp), fp, w));
}

TEST_CASE("freq reward: strictly decreasing in each capacitance total when compliant") {
    Floorplan fp = test::toy_floorplan();
    RewardWeights w;
    std::vector<double> ok(5, -1.0);
    DecapLayout l = DecapLayout::empty_for(fp);
    double prev = freq_reward(ok, l, fp, w);
    for (int k = 1; k <= kMaxLevel; ++k) {
        l.mos[0](0, 0) = k;
        double r = freq_reward(ok, l, fp, w);
        CHECK(r < prev);
        prev = r;
    }
    for (int k = 1; k <= kMaxLevel; ++k) {
        l.mim(1, 0) = k;
        double r = freq_reward(ok, l, fp, w);
        CHECK(r < prev);
        prev = r;
        CHECK(r >= 0.0);
    }
}

TEST_CASE("reward weights must sum to one") {
    CHECK_NOTHROW(RewardWeights{0.3, 0.7}.validate());
    CHECK_THROWS_AS((RewardWeights{0.6, 0.6}.validate()), InvalidArgument);
    CHECK_THROWS_AS((RewardWeights{-0.1, 1.1}.validate()), InvalidArgument);
}

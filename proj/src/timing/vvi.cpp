#include "pdn/timing/vvi.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn::timing {

namespace {

// Exact integral of max(v - level, 0) for v linear from v0 to v1 over dt.
double area_above(double v0, double v1, double level, double dt) {
    const double a = v0 - level;
    const double b = v1 - level;
    if (a <= 0.0 && b <= 0.0) return 0.0;
    if (a >= 0.0 && b >= 0.0) return 0.5 * dt * (a + b);
    // one crossing: triangle on the positive side
    const double pos = std::max(a, b);
    const double frac = pos / (pos - std::min(a, b));
    return 0.5 * dt * frac * pos;
}

}  // namespace

VviSpec VviSpec::from_vdd(double vdd, double band, double window) {
    return {vdd * (1.0 - band), vdd * (1.0 + band), window};
}

void VviSpec::validate(double vdd) const {
    if (!(v_min < vdd && vdd < v_max)) {
        throw InvalidArgument(fmt::format("VVI band [{}, {}] must bracket vdd = {}", v_min, v_max, vdd));
    }
    if (!(window > 0.0)) throw InvalidArgument("VVI window must be positive");
}

double compute_vvi(std::span<const double> times, std::span<const double> volts,
                   const VviSpec& spec) {
    if (times.size() != volts.size()) throw InvalidArgument("VVI trace length mismatch");
    // Neumaier-compensated: long traces of equal slivers otherwise drift
    double sum = 0.0, carry = 0.0;
    auto add = [&](double x) {
        const double t = sum + x;
        carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    };
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double dt = times[k] - times[k - 1];
        add(area_above(volts[k - 1], volts[k], spec.v_max, dt));
        add(area_above(-volts[k - 1], -volts[k], -spec.v_min, dt));
    }
    return sum + carry;
}

VviReport vvi_report(const circuit::TransientSolution& sol, const VviSpec& spec) {
    VviReport rep;
    rep.labels = sol.labels;
    rep.per_node.reserve(sol.voltages.size());
    for (const auto& trace : sol.voltages) {
        const double v = compute_vvi(sol.times, trace, spec);
        rep.per_node.push_back(v);
        rep.total += v;
        rep.violation_nodes += v > 0.0;
    }
    return rep;
}

double time_reward(double total, double init_total, double mos, double mos_max, double gamma) {
    if (!(init_total > 0.0)) {
        throw PreconditionError("initial total VVI is zero; there is nothing to optimize");
    }
    const double ratio = total / init_total;
    if (ratio > gamma) return 1.0 - ratio;
    const double frac = mos_max > 0.0 ? mos / mos_max : 0.0;
    return 1.0 - gamma + (1.0 - frac);
}

double time_reward(const VviReport& report, const VviReport& init, const DecapLayout& layout,
                   const Floorplan& fp, double gamma) {
    return time_reward(report.total, init.total, layout.total_mos(), max_mos_capacitance(fp), gamma);
}

}  // namespace pdn::timing

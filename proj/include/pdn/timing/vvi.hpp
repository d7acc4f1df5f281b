#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdn/circuit/transient.hpp"
#include "pdn/floorplan.hpp"
#include "pdn/layout.hpp"

namespace pdn::timing {

struct VviSpec {
    double v_min = 0.95;
    double v_max = 1.05;
    double window = 2e-9;

    static VviSpec from_vdd(double vdd, double band = 0.05, double window = 2e-9);
    void validate(double vdd) const;
};

struct VviReport {
    std::vector<std::string> labels;
    std::vector<double> per_node;  // V*s
    double total = 0.0;
    int violation_nodes = 0;
};

/// Integral of the out-of-band excursion of a sampled trace, treating the
/// trace as piecewise linear and splitting steps at threshold crossings.
double compute_vvi(std::span<const double> times, std::span<const double> volts, const VviSpec& spec);

VviReport vvi_report(const circuit::TransientSolution& sol, const VviSpec& spec);

/// Time-domain reward from the VVI ratio against the phase-start report.
/// Throws PreconditionError when init.total is zero.
double time_reward(double total, double init_total, double mos, double mos_max, double gamma);
double time_reward(const VviReport& report, const VviReport& init, const DecapLayout& layout,
                   const Floorplan& fp, double gamma);

}  // namespace pdn::timing

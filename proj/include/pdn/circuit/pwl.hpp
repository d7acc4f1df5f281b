#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pdn/netlist.hpp"

namespace pdn::circuit {

struct PwlPoint {
    double t;
    double i;
    friend bool operator==(const PwlPoint&, const PwlPoint&) = default;
};

/// Piecewise-linear current drawn from `node` to ground (positive = load).
struct PwlSource {
    NodeId node = kGround;
    std::vector<PwlPoint> points;  // strictly increasing t

    /// Linear interpolation, clamped to the end values outside the range.
    [[nodiscard]] double eval(double t) const;
    /// Throws InvalidArgument when breakpoints are not strictly increasing.
    void validate() const;

    friend bool operator==(const PwlSource&, const PwlSource&) = default;
};

double eval_pwl(const PwlSource& source, double t);

/// Exact integral of the waveform over its breakpoint span.
double pwl_integral(const PwlSource& source);

/// Sorted union of the breakpoint times of several sources.
std::vector<double> breakpoint_union(std::span<const PwlSource> sources);

}  // namespace pdn::circuit

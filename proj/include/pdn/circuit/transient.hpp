#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdn/circuit/pwl.hpp"
#include "pdn/netlist.hpp"

namespace pdn::circuit {

struct TransientOptions {
    double dt = 1e-12;
    double t_end = 2e-9;
    // Frequency at which dielectric-loss conductances are frozen.
    double loss_eval_frequency = 3.4e9;
};

/// Uniform time grid [0, t_end] and voltage samples per monitored node.
struct TransientSolution {
    std::vector<double> times;
    std::vector<NodeId> nodes;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> voltages;  // [node][sample]
};

/// Trapezoidal integration starting from the quiescent DC operating point
/// (all PWL sources off). The system matrix is factorized once.
/// Throws Divergence naming the step where a non-finite value appears.
TransientSolution transient_solve(const Netlist& net, std::span<const PwlSource> sources,
                                  const TransientOptions& options,
                                  std::span<const NodeId> monitored);

}  // namespace pdn::circuit

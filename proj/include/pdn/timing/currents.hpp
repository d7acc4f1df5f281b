#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pdn/circuit/pwl.hpp"
#include "pdn/floorplan.hpp"
#include "pdn/netlist.hpp"

namespace pdn::timing {

struct PulseOptions {
    double window = 2e-9;
    double min_width = 50e-12;
    double max_width = 300e-12;
    int internal_pulses = 4;   // triangles per on-chip node
    int io_pulse_pairs = 3;    // mirrored +/- pairs per component train
    double io_fraction = 0.05; // per-source I/O amplitude bound, fraction of i_ref
};

struct CurrentProfile {
    std::vector<circuit::PwlSource> internal;
    std::vector<circuit::PwlSource> io;
    double correlation = 0.0;
    std::uint64_t seed = 0;
    double i_ref = 0.0;
    double i_max = 0.0;

    [[nodiscard]] std::vector<circuit::PwlSource> all() const;
};

/// Seeded triangular pulse trains, one per node, rescaled so the summed
/// internal current never exceeds i_ref.
std::vector<circuit::PwlSource> gen_internal_currents(std::span<const NodeId> nodes, double i_ref,
                                                      std::uint64_t seed,
                                                      const PulseOptions& options = {});

/// Bipolar zero-integral I/O currents mixing one shared and one private
/// train per source with weights sqrt(rho) and sqrt(1 - rho).
std::vector<circuit::PwlSource> gen_io_currents(std::span<const NodeId> sites, double rho,
                                                double i_ref, std::uint64_t seed,
                                                const PulseOptions& options = {});

/// Internal and I/O streams use seeds derived from `seed` only, so profiles
/// at different rho share their underlying pulse draws.
CurrentProfile generate_profile(std::span<const NodeId> internal_nodes,
                                std::span<const NodeId> io_sites, double rho, double i_ref,
                                std::uint64_t seed, const PulseOptions& options = {});

/// Current-source attachment points of an assembled model: every on-chip
/// node draws internal current; each chiplet gets `io_per_chiplet` I/O
/// sources dealt round-robin over its io_sites (0 = one per site).
struct SourceNodes {
    std::vector<NodeId> internal;
    std::vector<NodeId> io;
};
SourceNodes source_nodes(const Netlist& net, const Floorplan& fp, int io_per_chiplet = 0);

/// Maximum of the summed waveform over the breakpoint union.
double max_sum(std::span<const circuit::PwlSource> sources);
/// Maximum of |sum| over the breakpoint union.
double max_abs_sum(std::span<const circuit::PwlSource> sources);

}  // namespace pdn::timing

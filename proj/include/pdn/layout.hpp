#pragma once

#include <vector>

#include "pdn/floorplan.hpp"
#include "pdn/grid.hpp"

namespace pdn {

inline constexpr int kMaxLevel = 10;
inline constexpr double kMimStep = 200e-12;
inline constexpr double kMosStep = 50e-12;

/// Per-UDC capacitance levels, 0..10. Capacitance = level * step.
struct DecapLayout {
    LevelGrid mim;               // interposer dims
    std::vector<LevelGrid> mos;  // one per chiplet, floorplan order

    /// All-zero layout shaped after the floorplan.
    static DecapLayout empty_for(const Floorplan& fp);
    /// Every feasible UDC at `level`.
    static DecapLayout uniform_for(const Floorplan& fp, int level);

    /// Throws LayoutViolation on shape mismatch, out-of-range levels, or
    /// nonzero levels at infeasible sites.
    void validate(const Floorplan& fp) const;

    [[nodiscard]] double total_mim() const;  // F
    [[nodiscard]] double total_mos() const;  // F

    friend bool operator==(const DecapLayout&, const DecapLayout&) = default;
};

/// Maximum placeable capacitance given the space matrices.
[[nodiscard]] double max_mim_capacitance(const Floorplan& fp);
[[nodiscard]] double max_mos_capacitance(const Floorplan& fp);

/// Enumerates feasible UDCs in a fixed order: interposer row-major first,
/// then each chiplet row-major. This order defines action-vector and
/// genome indexing.
struct UdcSite {
    int chiplet = -1;  // -1 = interposer
    GridCoord at;
};

std::vector<UdcSite> feasible_sites(const Floorplan& fp, bool include_interposer = true,
                                    bool include_chips = true);

/// Every UDC (feasible or not) in the same order as feasible_sites.
std::vector<UdcSite> all_sites(const Floorplan& fp);

int& level_at(DecapLayout& layout, const UdcSite& site);
int level_at(const DecapLayout& layout, const UdcSite& site);

}  // namespace pdn

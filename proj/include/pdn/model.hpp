#pragma once

#include "pdn/floorplan.hpp"
#include "pdn/layout.hpp"
#include "pdn/netlist.hpp"
#include "pdn/params.hpp"

namespace pdn {

enum class GridLayer { Chip, Interposer };

/// Transmission-line unit-cell grid: series R-L links between 4-neighbours,
/// shunt C plus dielectric-loss conductance at every node.
Netlist build_unit_cell_grid(GridDims dims, GridLayer layer, const PdnParams& params);

/// Interposer grid, one grid per chiplet tied down through lumped micro-bumps,
/// and a TSV + package-bump stack from each TSV site to an ideal supply.
Netlist assemble_hierarchy(const Floorplan& fp, const PdnParams& params);

/// Replaces every decap branch with the ones described by `layout`
/// (idempotent set semantics: applying A then B equals applying B).
Netlist apply_decaps(const Netlist& netlist, const Floorplan& fp, const DecapLayout& layout,
                     const PdnParams& params);

/// Sum of the capacitance carried by decap branches.
double decap_capacitance(const Netlist& netlist);

/// ESR of a decap of capacitance `c` given ESR = coeff / C (0 when coeff = 0).
double decap_esr(double coeff, double c);

}  // namespace pdn

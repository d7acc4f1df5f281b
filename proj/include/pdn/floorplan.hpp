#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pdn/grid.hpp"

namespace pdn {

struct Chiplet {
    std::string name;
    GridCoord origin;  // top-left UDC on the interposer
    GridDims dims;
    BinaryGrid space;                // 1 = decap-feasible UDC
    std::vector<GridCoord> io_sites; // chiplet-local coordinates
};

struct ProbePort {
    std::string chiplet;  // empty = interposer
    GridCoord at;
};

struct Floorplan {
    GridDims interposer;
    BinaryGrid interposer_space;
    std::vector<Chiplet> chiplets;
    std::vector<GridCoord> tsv_sites;
    std::vector<ProbePort> probes;

    /// Throws InvalidFloorplan on bad bounds, overlaps, or malformed matrices.
    void validate() const;

    [[nodiscard]] std::optional<std::size_t> chiplet_index(const std::string& name) const;

    /// Count of decap-feasible interposer / on-chip UDCs.
    [[nodiscard]] int feasible_interposer_count() const;
    [[nodiscard]] int feasible_chip_count() const;
};

}  // namespace pdn

#include "pdn/floorplan.hpp"

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn {

namespace {

void check_binary(const BinaryGrid& g, GridDims expected, const std::string& what) {
    if (g.dims() != expected) {
        throw InvalidFloorplan(fmt::format("{} is {}x{}, expected {}x{}", what, g.rows(), g.cols(),
                                           expected.rows, expected.cols));
    }
    for (int v : g) {
        if (v != 0 && v != 1) {
            throw InvalidFloorplan(fmt::format("{} entries must be 0 or 1, got {}", what, v));
        }
    }
}

}  // namespace

void Floorplan::validate() const {
    if (interposer.rows < 1 || interposer.cols < 1) {
        throw InvalidFloorplan(fmt::format("interposer grid must be at least 1x1, got {}x{}",
                                           interposer.rows, interposer.cols));
    }
    check_binary(interposer_space, interposer, "interposer space matrix");

    Grid<int> owner(interposer, -1);
    for (std::size_t k = 0; k < chiplets.size(); ++k) {
        const Chiplet& c = chiplets[k];
        if (c.name.empty()) throw InvalidFloorplan("chiplet with empty name");
        for (std::size_t j = 0; j < k; ++j) {
            if (chiplets[j].name == c.name) {
                throw InvalidFloorplan(fmt::format("duplicate chiplet name '{}'", c.name));
            }
        }
        if (c.dims.rows < 1 || c.dims.cols < 1) {
            throw InvalidFloorplan(fmt::format("chiplet '{}' grid must be at least 1x1", c.name));
        }
        check_binary(c.space, c.dims, fmt::format("chiplet '{}' space matrix", c.name));
        for (int r = 0; r < c.dims.rows; ++r) {
            for (int col = 0; col < c.dims.cols; ++col) {
                GridCoord at{c.origin.row + r, c.origin.col + col};
                if (!owner.contains(at)) {
                    throw InvalidFloorplan(fmt::format(
                        "chiplet '{}' footprint leaves the interposer at ({}, {})", c.name, at.row,
                        at.col));
                }
                if (owner[at] >= 0) {
                    throw InvalidFloorplan(fmt::format("chiplet '{}' overlaps chiplet '{}' at ({}, {})",
                                                       c.name, chiplets[owner[at]].name, at.row,
                                                       at.col));
                }
                owner[at] = static_cast<int>(k);
            }
        }
        for (const GridCoord& s : c.io_sites) {
            if (!c.space.contains(s)) {
                throw InvalidFloorplan(fmt::format("chiplet '{}' io site ({}, {}) is off-grid",
                                                   c.name, s.row, s.col));
            }
        }
    }

    if (tsv_sites.empty()) throw InvalidFloorplan("floorplan needs at least one TSV site");
    for (const GridCoord& s : tsv_sites) {
        if (!interposer_space.contains(s)) {
            throw InvalidFloorplan(
                fmt::format("TSV site ({}, {}) is outside the interposer", s.row, s.col));
        }
    }
    for (const ProbePort& p : probes) {
        if (p.chiplet.empty()) {
            if (!interposer_space.contains(p.at)) {
                throw InvalidFloorplan(fmt::format("probe port ({}, {}) is outside the interposer",
                                                   p.at.row, p.at.col));
            }
            continue;
        }
        auto idx = chiplet_index(p.chiplet);
        if (!idx) throw InvalidFloorplan(fmt::format("probe port names unknown chiplet '{}'", p.chiplet));
        if (!chiplets[*idx].space.contains(p.at)) {
            throw InvalidFloorplan(fmt::format("probe port ({}, {}) is outside chiplet '{}'",
                                               p.at.row, p.at.col, p.chiplet));
        }
    }
}

std::optional<std::size_t> Floorplan::chiplet_index(const std::string& name) const {
    for (std::size_t k = 0; k < chiplets.size(); ++k) {
        if (chiplets[k].name == name) return k;
    }
    return std::nullopt;
}

int Floorplan::feasible_interposer_count() const {
    int n = 0;
    for (int v : interposer_space) n += v;
    return n;
}

int Floorplan::feasible_chip_count() const {
    int n = 0;
    for (const Chiplet& c : chiplets) {
        for (int v : c.space) n += v;
    }
    return n;
}

}  // namespace pdn

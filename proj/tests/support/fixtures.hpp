#pragma once

// Shared test fixtures: small floorplans and hand-built circuits.

#include <algorithm>
#include <cmath>
#include <string>

#include "pdn/floorplan.hpp"
#include "pdn/netlist.hpp"

namespace pdn::test {

inline Chiplet make_chiplet(std::string name, GridCoord origin, GridDims dims) {
    Chiplet c;
    c.name = std::move(name);
    c.origin = origin;
    c.dims = dims;
    c.space = BinaryGrid(dims, 1);
    return c;
}

/// Interposer of `intp` UDCs, all feasible, TSVs at the given sites.
inline Floorplan make_floorplan(GridDims intp, std::vector<GridCoord> tsvs) {
    Floorplan fp;
    fp.interposer = intp;
    fp.interposer_space = BinaryGrid(intp, 1);
    fp.tsv_sites = std::move(tsvs);
    return fp;
}

/// 2x2 interposer with one 2x2 chiplet on top, one TSV site, probe at (0,0).
inline Floorplan toy_floorplan() {
    Floorplan fp = make_floorplan({2, 2}, {{0, 0}});
    Chiplet c = make_chiplet("core", {0, 0}, {2, 2});
    c.io_sites = {{0, 1}, {1, 1}};
    fp.chiplets.push_back(c);
    fp.probes.push_back({"core", {0, 0}});
    return fp;
}

/// Supply node tied to ground through an ideal source; returns its id.
inline NodeId add_supply(Netlist& net, double vdd) {
    net.supply = net.add_node({Layer::Internal, -1, {}, "vdd"});
    net.add_branch({BranchKind::VoltageSource, net.supply, kGround, vdd});
    return net.supply;
}

inline NodeId add_plain_node(Netlist& net, const std::string& name) {
    return net.add_node({Layer::Internal, -1, {}, name});
}

/// Relative comparison without an absolute floor (doctest::Approx has one).
inline bool rel_eq(double a, double b, double tol = 1e-12) {
    const double m = std::max(std::abs(a), std::abs(b));
    return m == 0.0 || std::abs(a - b) <= tol * m;
}

}  // namespace pdn::test

#include "pdn/model.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn {

namespace {

struct CellValues {
    double r, l, c;
};

CellValues cell_values(GridLayer layer, const PdnParams& p) {
    return layer == GridLayer::Chip ? CellValues{p.r_chip, p.l_chip, p.c_chip}
                                    : CellValues{p.r_intp, p.l_intp, p.c_intp};
}

// Adds a grid into `net`, returning its node table.
Grid<NodeId> add_grid(Netlist& net, GridDims dims, GridLayer layer, int chiplet,
                      const std::string& prefix, const PdnParams& p) {
    if (dims.rows < 1 || dims.cols < 1) {
        throw InvalidFloorplan(fmt::format("grid '{}' has zero dimension {}x{}", prefix, dims.rows,
                                           dims.cols));
    }
    const CellValues v = cell_values(layer, p);
    const Layer tag = layer == GridLayer::Chip ? Layer::Chip : Layer::Interposer;
    Grid<NodeId> nodes(dims, kGround);
    for (int r = 0; r < dims.rows; ++r) {
        for (int c = 0; c < dims.cols; ++c) {
            nodes(r, c) = net.add_node({tag, chiplet, {r, c}, fmt::format("{}_r{}_c{}", prefix, r, c)});
        }
    }
    for (int r = 0; r < dims.rows; ++r) {
        for (int c = 0; c < dims.cols; ++c) {
            if (c + 1 < dims.cols) {
                net.add_branch({BranchKind::Inductor, nodes(r, c), nodes(r, c + 1), v.l, v.r});
            }
            if (r + 1 < dims.rows) {
                net.add_branch({BranchKind::Inductor, nodes(r, c), nodes(r + 1, c), v.l, v.r});
            }
        }
    }
    for (NodeId n : nodes) {
        net.add_branch({BranchKind::Capacitor, n, kGround, v.c});
        net.add_branch({BranchKind::LossConductance, n, kGround, v.c * p.loss_tangent});
    }
    return nodes;
}

}  // namespace

double decap_esr(double coeff, double c) { return coeff > 0.0 && c > 0.0 ? coeff / c : 0.0; }

Netlist build_unit_cell_grid(GridDims dims, GridLayer layer, const PdnParams& params) {
    params.validate();
    Netlist net;
    Grid<NodeId> nodes = add_grid(net, dims, layer, layer == GridLayer::Chip ? 0 : -1,
                                  layer == GridLayer::Chip ? "chip" : "intp", params);
    if (layer == GridLayer::Chip) {
        net.chip_nodes.push_back(std::move(nodes));
    } else {
        net.interposer_nodes = std::move(nodes);
    }
    return net;
}

Netlist assemble_hierarchy(const Floorplan& fp, const PdnParams& params) {
    params.validate();
    fp.validate();

    Netlist net;
    net.interposer_nodes = add_grid(net, fp.interposer, GridLayer::Interposer, -1, "intp", params);

    const double nb = params.ubumps_per_udc;
    for (std::size_t k = 0; k < fp.chiplets.size(); ++k) {
        const Chiplet& chip = fp.chiplets[k];
        Grid<NodeId> nodes =
            add_grid(net, chip.dims, GridLayer::Chip, static_cast<int>(k), chip.name, params);
        for (int r = 0; r < chip.dims.rows; ++r) {
            for (int c = 0; c < chip.dims.cols; ++c) {
                NodeId below = net.interposer_nodes(chip.origin.row + r, chip.origin.col + c);
                net.add_branch({BranchKind::Inductor, nodes(r, c), below, params.l_ubump / nb,
                                params.r_ubump / nb});
            }
        }
        net.chip_nodes.push_back(std::move(nodes));
    }

    net.supply = net.add_node({Layer::Internal, -1, {}, "vdd"});
    net.add_branch({BranchKind::VoltageSource, net.supply, kGround, params.vdd});

    const double nt = params.tsvs_per_site;
    for (const GridCoord& s : fp.tsv_sites) {
        NodeId top = net.interposer_nodes[s];
        NodeId mid = net.add_node({Layer::Internal, -1, s, fmt::format("tsv_r{}_c{}", s.row, s.col)});
        net.add_branch({BranchKind::Inductor, top, mid, params.l_tsv / nt, params.r_tsv / nt});
        net.add_branch({BranchKind::Capacitor, mid, kGround, params.c_tsv * nt});
        net.add_branch({BranchKind::Inductor, mid, net.supply, params.l_bump / nt, params.r_bump / nt});
    }

    for (const ProbePort& p : fp.probes) {
        if (p.chiplet.empty()) {
            net.add_port({fmt::format("intp_r{}_c{}", p.at.row, p.at.col), net.interposer_nodes[p.at]});
        } else {
            auto idx = *fp.chiplet_index(p.chiplet);
            net.add_port({fmt::format("{}_r{}_c{}", p.chiplet, p.at.row, p.at.col),
                          net.chip_nodes[idx][p.at]});
        }
    }
    return net;
}

Netlist apply_decaps(const Netlist& netlist, const Floorplan& fp, const DecapLayout& layout,
                     const PdnParams& params) {
    layout.validate(fp);
    Netlist out = netlist;
    auto& br = out.branches();
    br.erase(std::remove_if(br.begin(), br.end(), [](const Branch& b) { return b.decap; }), br.end());

    for (int r = 0; r < layout.mim.rows(); ++r) {
        for (int c = 0; c < layout.mim.cols(); ++c) {
            int level = layout.mim(r, c);
            if (level == 0) continue;
            double cap = level * kMimStep;
            out.add_branch({BranchKind::Capacitor, out.interposer_nodes(r, c), kGround, cap,
                            decap_esr(params.mim_esr_coeff, cap), true});
        }
    }
    for (std::size_t k = 0; k < layout.mos.size(); ++k) {
        const LevelGrid& g = layout.mos[k];
        for (int r = 0; r < g.rows(); ++r) {
            for (int c = 0; c < g.cols(); ++c) {
                int level = g(r, c);
                if (level == 0) continue;
                double cap = level * kMosStep;
                out.add_branch({BranchKind::Capacitor, out.chip_nodes.at(k)(r, c), kGround, cap,
                                decap_esr(params.mos_esr_coeff, cap), true});
            }
        }
    }
    return out;
}

double decap_capacitance(const Netlist& netlist) {
    double total = 0.0;
    for (const Branch& b : netlist.branches()) {
        if (b.decap) total += b.value;
    }
    return total;
}

}  // namespace pdn

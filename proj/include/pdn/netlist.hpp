#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdn/grid.hpp"

namespace pdn {

using NodeId = int;
inline constexpr NodeId kGround = 0;

enum class BranchKind : std::uint8_t {
    Resistor,
    Inductor,         // value = L, series_r = series resistance
    Capacitor,        // value = C, series_r = ESR
    LossConductance,  // value = C*tan(delta); G(f) = 2*pi*f*value
    VoltageSource,    // value = DC volts, a = +, b = -
    CurrentSource,    // value = DC amps drawn from a into b
};

const char* to_string(BranchKind kind);

enum class Layer : std::uint8_t { Interposer, Chip, Internal };

struct Branch {
    BranchKind kind{};
    NodeId a = kGround;
    NodeId b = kGround;
    double value = 0.0;
    double series_r = 0.0;
    bool decap = false;  // placed by apply_decaps

    friend bool operator==(const Branch&, const Branch&) = default;
    friend auto operator<=>(const Branch&, const Branch&) = default;
};

struct NodeLabel {
    Layer layer = Layer::Internal;
    int chiplet = -1;  // index for Layer::Chip
    GridCoord at;
    std::string name;
};

struct Port {
    std::string name;
    NodeId node = kGround;
    NodeId reference = kGround;
};

/// Node-indexed RLGC graph. Node 0 is ground.
class Netlist {
public:
    Netlist();

    NodeId add_node(NodeLabel label);
    void add_branch(const Branch& b);
    void add_port(Port p) { ports_.push_back(std::move(p)); }

    [[nodiscard]] int node_count() const { return static_cast<int>(labels_.size()); }
    [[nodiscard]] const std::vector<Branch>& branches() const { return branches_; }
    [[nodiscard]] std::vector<Branch>& branches() { return branches_; }
    [[nodiscard]] const std::vector<Port>& ports() const { return ports_; }
    [[nodiscard]] const std::vector<NodeLabel>& labels() const { return labels_; }
    [[nodiscard]] const NodeLabel& label(NodeId n) const { return labels_.at(n); }

    // Grid lookup tables; empty grids when the layer is absent.
    Grid<NodeId> interposer_nodes;
    std::vector<Grid<NodeId>> chip_nodes;
    NodeId supply = kGround;

    [[nodiscard]] NodeId interposer_node(GridCoord c) const { return interposer_nodes.at(c); }
    [[nodiscard]] NodeId chip_node(int chiplet, GridCoord c) const;

    /// All on-chip grid nodes, chiplet order then row-major.
    [[nodiscard]] std::vector<NodeId> on_chip_nodes() const;

    [[nodiscard]] int count(BranchKind kind) const;

    /// Throws InvalidArgument on dangling terminals; throws SingularSystem if
    /// a node is unreachable from the supply/ground through R/L/V branches.
    void validate() const;

    /// One branch per line: kind, node a, node b, value[, series_r].
    void write_listing(std::ostream& os) const;

private:
    std::vector<NodeLabel> labels_;
    std::vector<Branch> branches_;
    std::vector<Port> ports_;
};

}  // namespace pdn

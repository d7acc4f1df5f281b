#include "pdn/netlist.hpp"

#include <ostream>
#include <queue>

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn {

const char* to_string(BranchKind kind) {
    switch (kind) {
        case BranchKind::Resistor: return "R";
        case BranchKind::Inductor: return "L";
        case BranchKind::Capacitor: return "C";
        case BranchKind::LossConductance: return "G";
        case BranchKind::VoltageSource: return "V";
        case BranchKind::CurrentSource: return "I";
    }
    return "?";
}

Netlist::Netlist() { labels_.push_back({Layer::Internal, -1, {}, "gnd"}); }

NodeId Netlist::add_node(NodeLabel label) {
    labels_.push_back(std::move(label));
    return static_cast<NodeId>(labels_.size() - 1);
}

void Netlist::add_branch(const Branch& b) { branches_.push_back(b); }

NodeId Netlist::chip_node(int chiplet, GridCoord c) const {
    return chip_nodes.at(static_cast<std::size_t>(chiplet)).at(c);
}

std::vector<NodeId> Netlist::on_chip_nodes() const {
    std::vector<NodeId> out;
    for (const auto& g : chip_nodes) out.insert(out.end(), g.begin(), g.end());
    return out;
}

int Netlist::count(BranchKind kind) const {
    int n = 0;
    for (const Branch& b : branches_) n += b.kind == kind;
    return n;
}

void Netlist::validate() const {
    const int n = node_count();
    if (n < 2 || branches_.empty()) throw InvalidArgument("netlist is empty");
    std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(n));
    for (const Branch& b : branches_) {
        if (b.a < 0 || b.a >= n || b.b < 0 || b.b >= n) {
            throw InvalidArgument(fmt::format("branch {} has terminal outside 0..{}", to_string(b.kind),
                                              n - 1));
        }
        bool conducts = b.kind == BranchKind::Resistor || b.kind == BranchKind::Inductor ||
                        b.kind == BranchKind::VoltageSource;
        if (conducts) {
            adj[b.a].push_back(b.b);
            adj[b.b].push_back(b.a);
        }
    }
    // Reachability from ground through DC-conducting branches; the supply
    // source ties the supply node to ground.
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::queue<NodeId> q;
    q.push(kGround);
    seen[kGround] = 1;
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        for (NodeId v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                q.push(v);
            }
        }
    }
    for (NodeId v = 0; v < n; ++v) {
        if (!seen[v]) {
            throw SingularSystem(fmt::format("node {} ('{}') has no resistive path to the supply", v,
                                             labels_[v].name));
        }
    }
}

void Netlist::write_listing(std::ostream& os) const {
    for (const Branch& b : branches_) {
        os << fmt::format("{} {} {} {:.6e}", to_string(b.kind), b.a, b.b, b.value);
        if (b.series_r != 0.0) os << fmt::format(" rs={:.6e}", b.series_r);
        if (b.decap) os << " decap";
        os << '\n';
    }
}

}  // namespace pdn

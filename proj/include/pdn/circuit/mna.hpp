#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "pdn/netlist.hpp"

namespace pdn::circuit {

using Complex = std::complex<double>;
using ComplexSparse = Eigen::SparseMatrix<Complex>;
using RealSparse = Eigen::SparseMatrix<double>;

/// Maps netlist nodes and auxiliary branch currents onto MNA unknowns.
///
/// Node n > 0 occupies row n - 1. Inductors and voltage sources each get one
/// auxiliary current row after the node rows. For transient analysis every
/// capacitor with a nonzero series resistance gets an extra internal node
/// row after the auxiliaries.
struct MnaIndex {
    int node_rows = 0;
    int aux_rows = 0;
    int internal_rows = 0;
    std::vector<int> aux_of_branch;       // -1 when the branch has no auxiliary
    std::vector<int> internal_of_branch;  // -1 when not split (transient only)

    [[nodiscard]] int dim() const { return node_rows + aux_rows + internal_rows; }
    /// Row of node n, or -1 for ground.
    [[nodiscard]] static int row(NodeId n) { return n - 1; }
};

MnaIndex index_netlist(const Netlist& net, bool split_series_capacitors);

/// Complex admittance-form system at one frequency; rhs template is zero
/// (AC sources are attached by the caller).
struct AcSystem {
    MnaIndex index;
    ComplexSparse matrix;
    Eigen::VectorXcd rhs;
};

/// Real descriptor form C x' + G x = b for transient analysis.
/// Dielectric-loss conductances are evaluated at `loss_eval_frequency`.
struct TransientSystem {
    MnaIndex index;
    RealSparse g;
    RealSparse c;
    Eigen::VectorXd rhs;  // constant (DC) sources
};

/// Standard MNA stamping. Throws InvalidArgument on an empty netlist and
/// SingularSystem naming an unreachable node on floating topology.
AcSystem mna_assemble_ac(const Netlist& net, double frequency);
TransientSystem mna_assemble_transient(const Netlist& net, double loss_eval_frequency);

}  // namespace pdn::circuit

#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "pdn/circuit/mna.hpp"
#include "pdn/netlist.hpp"

namespace pdn::circuit {

/// Self impedance per port over a frequency list: z[port][freq].
struct AcSolution {
    std::vector<double> frequencies;
    std::vector<std::string> ports;
    std::vector<std::vector<Complex>> z;
};

/// Repeated AC solves of one netlist topology.
///
/// The sparsity pattern and symbolic factorization are computed once at
/// construction; each frequency only restamps values and refactorizes. One
/// instance is a per-thread workspace; frequencies may be visited in any order.
class AcSweep {
public:
    AcSweep(const Netlist& net, std::vector<Port> ports);

    /// Port impedance matrix Z(f): column j holds node voltages at every
    /// port for a 1 A injection at port j.
    Eigen::MatrixXcd port_matrix(double frequency);

    /// Diagonal of port_matrix.
    std::vector<Complex> self_impedance(double frequency);

    [[nodiscard]] int dim() const { return dim_; }

private:
    enum class StampKind { Constant, JOmega, Omega, SeriesRc };
    struct Stamp {
        int slot;  // index into matrix value array
        StampKind kind;
        double p;
        double q;
    };

    void factorize(double frequency);

    int dim_ = 0;
    std::vector<Port> ports_;
    ComplexSparse matrix_;
    std::vector<Stamp> stamps_;
    Eigen::SparseLU<ComplexSparse, Eigen::COLAMDOrdering<int>> lu_;
};

/// One factorization per frequency, one solve per port. Errors carry the
/// failing frequency.
AcSolution ac_port_impedance(const Netlist& net, std::span<const Port> ports,
                             std::span<const double> frequencies);

}  // namespace pdn::circuit

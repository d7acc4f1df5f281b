#include "pdn/circuit/mna.hpp"

#include <numbers>

#include "pdn/error.hpp"
#include "stamps.hpp"

namespace pdn::circuit {

MnaIndex index_netlist(const Netlist& net, bool split_series_capacitors) {
    MnaIndex idx;
    idx.node_rows = net.node_count() - 1;
    const auto& br = net.branches();
    idx.aux_of_branch.assign(br.size(), -1);
    idx.internal_of_branch.assign(br.size(), -1);
    int next = idx.node_rows;
    for (std::size_t i = 0; i < br.size(); ++i) {
        if (br[i].kind == BranchKind::Inductor || br[i].kind == BranchKind::VoltageSource) {
            idx.aux_of_branch[i] = next++;
            ++idx.aux_rows;
        }
    }
    if (split_series_capacitors) {
        for (std::size_t i = 0; i < br.size(); ++i) {
            if (br[i].kind == BranchKind::Capacitor && br[i].series_r > 0.0) {
                idx.internal_of_branch[i] = next++;
                ++idx.internal_rows;
            }
        }
    }
    return idx;
}

AcSystem mna_assemble_ac(const Netlist& net, double frequency) {
    net.validate();
    AcSystem sys;
    sys.index = index_netlist(net, false);
    const int n = sys.index.dim();
    const double omega = 2.0 * std::numbers::pi * frequency;
    std::vector<Eigen::Triplet<Complex>> trip;
    visit_ac_stamps(net, sys.index, [&](int r, int c, AcStampKind kind, double p, double q) {
        trip.emplace_back(r, c, evaluate_ac_stamp(kind, p, q, omega));
    });
    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.rhs = Eigen::VectorXcd::Zero(n);
    return sys;
}

TransientSystem mna_assemble_transient(const Netlist& net, double loss_eval_frequency) {
    net.validate();
    TransientSystem sys;
    sys.index = index_netlist(net, true);
    const int n = sys.index.dim();
    const double omega = 2.0 * std::numbers::pi * loss_eval_frequency;
    std::vector<Eigen::Triplet<double>> gt;
    std::vector<Eigen::Triplet<double>> ct;
    sys.rhs = Eigen::VectorXd::Zero(n);

    auto conductance = [](std::vector<Eigen::Triplet<double>>& t, int ra, int rb, double y) {
        if (ra >= 0) t.emplace_back(ra, ra, y);
        if (rb >= 0) t.emplace_back(rb, rb, y);
        if (ra >= 0 && rb >= 0) {
            t.emplace_back(ra, rb, -y);
            t.emplace_back(rb, ra, -y);
        }
    };
    auto incidence = [&](int ra, int rb, int k) {
        if (ra >= 0) {
            gt.emplace_back(ra, k, 1.0);
            gt.emplace_back(k, ra, 1.0);
        }
        if (rb >= 0) {
            gt.emplace_back(rb, k, -1.0);
            gt.emplace_back(k, rb, -1.0);
        }
    };

    const auto& br = net.branches();
    for (std::size_t i = 0; i < br.size(); ++i) {
        const Branch& b = br[i];
        const int ra = MnaIndex::row(b.a);
        const int rb = MnaIndex::row(b.b);
        switch (b.kind) {
            case BranchKind::Resistor:
                conductance(gt, ra, rb, 1.0 / b.value);
                break;
            case BranchKind::Capacitor: {
                const int m = sys.index.internal_of_branch[i];
                if (m < 0) {
                    conductance(ct, ra, rb, b.value);
                } else {
                    conductance(gt, ra, m, 1.0 / b.series_r);
                    conductance(ct, m, rb, b.value);
                }
                break;
            }
            case BranchKind::LossConductance:
                conductance(gt, ra, rb, omega * b.value);
                break;
            case BranchKind::Inductor: {
                const int k = sys.index.aux_of_branch[i];
                incidence(ra, rb, k);
                if (b.series_r != 0.0) gt.emplace_back(k, k, -b.series_r);
                ct.emplace_back(k, k, -b.value);
                break;
            }
            case BranchKind::VoltageSource: {
                const int k = sys.index.aux_of_branch[i];
                incidence(ra, rb, k);
                sys.rhs[k] += b.value;
                break;
            }
            case BranchKind::CurrentSource:
                if (ra >= 0) sys.rhs[ra] -= b.value;
                if (rb >= 0) sys.rhs[rb] += b.value;
                break;
        }
    }
    sys.g.resize(n, n);
    sys.g.setFromTriplets(gt.begin(), gt.end());
    sys.c.resize(n, n);
    sys.c.setFromTriplets(ct.begin(), ct.end());
    return sys;
}

}  // namespace pdn::circuit

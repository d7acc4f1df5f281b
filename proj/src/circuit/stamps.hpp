#pragma once

// Internal: AC stamp enumeration shared by one-shot assembly and AcSweep.

#include <complex>

#include "pdn/circuit/mna.hpp"

namespace pdn::circuit {

enum class AcStampKind {
    Constant,  // p
    JOmega,    // j*omega*p
    Omega,     // omega*p
    SeriesRc,  // sign(p) * y with y = 1 / (|p| + 1/(j*omega*q))
};

inline std::complex<double> evaluate_ac_stamp(AcStampKind kind, double p, double q, double omega) {
    switch (kind) {
        case AcStampKind::Constant: return {p, 0.0};
        case AcStampKind::JOmega: return {0.0, omega * p};
        case AcStampKind::Omega: return {omega * p, 0.0};
        case AcStampKind::SeriesRc: {
            const double sign = p < 0.0 ? -1.0 : 1.0;
            const double r = sign * p;
            const std::complex<double> jwc{0.0, omega * q};
            return sign * jwc / (1.0 + r * jwc);
        }
    }
    return {};
}

// Calls emit(row, col, kind, p, q) for every nonzero AC stamp entry.
template <typename Emit>
void visit_ac_stamps(const Netlist& net, const MnaIndex& idx, Emit&& emit) {
    auto conductance = [&](int ra, int rb, AcStampKind kind, double p, double q) {
        const double neg = -p;
        if (ra >= 0) emit(ra, ra, kind, p, q);
        if (rb >= 0) emit(rb, rb, kind, p, q);
        if (ra >= 0 && rb >= 0) {
            emit(ra, rb, kind, neg, q);
            emit(rb, ra, kind, neg, q);
        }
    };
    auto incidence = [&](int ra, int rb, int k) {
        if (ra >= 0) {
            emit(ra, k, AcStampKind::Constant, 1.0, 0.0);
            emit(k, ra, AcStampKind::Constant, 1.0, 0.0);
        }
        if (rb >= 0) {
            emit(rb, k, AcStampKind::Constant, -1.0, 0.0);
            emit(k, rb, AcStampKind::Constant, -1.0, 0.0);
        }
    };

    const auto& br = net.branches();
    for (std::size_t i = 0; i < br.size(); ++i) {
        const Branch& b = br[i];
        const int ra = MnaIndex::row(b.a);
        const int rb = MnaIndex::row(b.b);
        switch (b.kind) {
            case BranchKind::Resistor:
                conductance(ra, rb, AcStampKind::Constant, 1.0 / b.value, 0.0);
                break;
            case BranchKind::Capacitor:
                if (b.series_r > 0.0) {
                    conductance(ra, rb, AcStampKind::SeriesRc, b.series_r, b.value);
                } else {
                    conductance(ra, rb, AcStampKind::JOmega, b.value, 0.0);
                }
                break;
            case BranchKind::LossConductance:
                conductance(ra, rb, AcStampKind::Omega, b.value, 0.0);
                break;
            case BranchKind::Inductor: {
                const int k = idx.aux_of_branch[i];
                incidence(ra, rb, k);
                emit(k, k, AcStampKind::Constant, -b.series_r, 0.0);
                emit(k, k, AcStampKind::JOmega, -b.value, 0.0);
                break;
            }
            case BranchKind::VoltageSource:
                incidence(ra, rb, idx.aux_of_branch[i]);
                break;
            case BranchKind::CurrentSource:
                break;
        }
    }
}

}  // namespace pdn::circuit

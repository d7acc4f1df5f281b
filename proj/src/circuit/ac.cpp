#include "pdn/circuit/ac.hpp"

#include <algorithm>
#include <numbers>

#include <fmt/format.h>

#include "pdn/error.hpp"
#include "stamps.hpp"

namespace pdn::circuit {

AcSweep::AcSweep(const Netlist& net, std::vector<Port> ports) : ports_(std::move(ports)) {
    net.validate();
    if (ports_.empty()) throw InvalidArgument("AC analysis needs at least one port");
    for (const Port& p : ports_) {
        if (p.node <= 0 || p.node >= net.node_count() || p.reference < 0 ||
            p.reference >= net.node_count() || p.node == p.reference) {
            throw InvalidArgument(fmt::format("port '{}' references an invalid node", p.name));
        }
    }

    const MnaIndex idx = index_netlist(net, false);
    dim_ = idx.dim();

    struct Raw {
        int r, c;
        AcStampKind kind;
        double p, q;
    };
    std::vector<Raw> raw;
    visit_ac_stamps(net, idx, [&](int r, int c, AcStampKind kind, double p, double q) {
        raw.push_back({r, c, kind, p, q});
    });

    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(raw.size());
    for (const Raw& s : raw) trip.emplace_back(s.r, s.c, Complex{1.0, 0.0});
    matrix_.resize(dim_, dim_);
    matrix_.setFromTriplets(trip.begin(), trip.end());
    matrix_.makeCompressed();

    const int* outer = matrix_.outerIndexPtr();
    const int* inner = matrix_.innerIndexPtr();
    stamps_.reserve(raw.size());
    for (const Raw& s : raw) {
        const int* first = inner + outer[s.c];
        const int* last = inner + outer[s.c + 1];
        const int* hit = std::lower_bound(first, last, s.r);
        stamps_.push_back({static_cast<int>(hit - inner), static_cast<StampKind>(s.kind), s.p, s.q});
    }

    lu_.analyzePattern(matrix_);
}

void AcSweep::factorize(double frequency) {
    if (!(frequency > 0.0)) {
        throw InvalidArgument(fmt::format("AC frequency must be positive, got {}", frequency));
    }
    const double omega = 2.0 * std::numbers::pi * frequency;
    Complex* values = matrix_.valuePtr();
    std::fill(values, values + matrix_.nonZeros(), Complex{});
    for (const Stamp& s : stamps_) {
        values[s.slot] += evaluate_ac_stamp(static_cast<AcStampKind>(s.kind), s.p, s.q, omega);
    }
    lu_.factorize(matrix_);
    if (lu_.info() != Eigen::Success) {
        throw SingularSystem(fmt::format("MNA system is singular at f = {:.6e} Hz", frequency));
    }
}

Eigen::MatrixXcd AcSweep::port_matrix(double frequency) {
    factorize(frequency);
    const auto np = static_cast<Eigen::Index>(ports_.size());
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(dim_, np);
    for (Eigen::Index j = 0; j < np; ++j) {
        const Port& p = ports_[j];
        rhs(MnaIndex::row(p.node), j) += 1.0;
        if (p.reference != kGround) rhs(MnaIndex::row(p.reference), j) -= 1.0;
    }
    Eigen::MatrixXcd x = lu_.solve(rhs);
    Eigen::MatrixXcd z(np, np);
    for (Eigen::Index i = 0; i < np; ++i) {
        const Port& p = ports_[i];
        for (Eigen::Index j = 0; j < np; ++j) {
            Complex v = x(MnaIndex::row(p.node), j);
            if (p.reference != kGround) v -= x(MnaIndex::row(p.reference), j);
            z(i, j) = v;
        }
    }
    if (!z.allFinite()) {
        throw SingularSystem(fmt::format("non-finite port impedance at f = {:.6e} Hz", frequency));
    }
    return z;
}

std::vector<Complex> AcSweep::self_impedance(double frequency) {
    Eigen::MatrixXcd z = port_matrix(frequency);
    std::vector<Complex> out(ports_.size());
    for (std::size_t i = 0; i < ports_.size(); ++i) out[i] = z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    return out;
}

AcSolution ac_port_impedance(const Netlist& net, std::span<const Port> ports,
                             std::span<const double> frequencies) {
    AcSweep sweep(net, std::vector<Port>(ports.begin(), ports.end()));
    AcSolution sol;
    sol.frequencies.assign(frequencies.begin(), frequencies.end());
    for (const Port& p : ports) sol.ports.push_back(p.name);
    sol.z.assign(ports.size(), std::vector<Complex>(frequencies.size()));
    for (std::size_t k = 0; k < frequencies.size(); ++k) {
        std::vector<Complex> zk = sweep.self_impedance(frequencies[k]);
        for (std::size_t i = 0; i < ports.size(); ++i) sol.z[i][k] = zk[i];
    }
    return sol;
}

}  // namespace pdn::circuit

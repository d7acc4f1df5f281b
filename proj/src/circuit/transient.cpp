#include "pdn/circuit/transient.hpp"

#include <cmath>

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "pdn/circuit/mna.hpp"
#include "pdn/error.hpp"

namespace pdn::circuit {

namespace {

// Evaluates a PWL source at monotonically increasing times.
class PwlCursor {
public:
    explicit PwlCursor(const PwlSource& s) : src_(&s) {}

    double at(double t) {
        const auto& p = src_->points;
        if (p.empty()) return 0.0;
        if (t <= p.front().t) return p.front().i;
        if (t >= p.back().t) return p.back().i;
        while (pos_ + 1 < p.size() && p[pos_ + 1].t <= t) ++pos_;
        const PwlPoint& a = p[pos_];
        const PwlPoint& b = p[pos_ + 1];
        return a.i + (t - a.t) / (b.t - a.t) * (b.i - a.i);
    }

private:
    const PwlSource* src_;
    std::size_t pos_ = 0;
};

// Capacitor voltages and inductor currents keep their quiescent values at
// t = 0; unknowns without a reactive stamp are re-solved against the t = 0
// excitation so that the first trapezoidal step starts on the constraint
// manifold.
void make_consistent(const TransientSystem& sys, const Eigen::VectorXd& excitation,
                     Eigen::VectorXd& x) {
    const int n = sys.index.dim();
    std::vector<char> dynamic(static_cast<std::size_t>(n), 0);
    for (int k = 0; k < sys.c.outerSize(); ++k) {
        for (RealSparse::InnerIterator it(sys.c, k); it; ++it) {
            if (it.value() != 0.0) {
                dynamic[it.row()] = 1;
                dynamic[it.col()] = 1;
            }
        }
    }
    std::vector<int> alg_of(static_cast<std::size_t>(n), -1);
    int na = 0;
    for (int i = 0; i < n; ++i) {
        if (!dynamic[i]) alg_of[i] = na++;
    }
    if (na == 0) return;

    Eigen::VectorXd residual = excitation - sys.g * x;
    Eigen::VectorXd rhs(na);
    for (int i = 0; i < n; ++i) {
        if (alg_of[i] >= 0) rhs[alg_of[i]] = residual[i];
    }
    if (rhs.cwiseAbs().maxCoeff() == 0.0) return;

    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < sys.g.outerSize(); ++k) {
        for (RealSparse::InnerIterator it(sys.g, k); it; ++it) {
            const int r = alg_of[it.row()];
            const int c = alg_of[it.col()];
            if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
        }
    }
    RealSparse gaa(na, na);
    gaa.setFromTriplets(t.begin(), t.end());
    gaa.makeCompressed();
    Eigen::SparseLU<RealSparse> lu;
    lu.compute(gaa);
    if (lu.info() != Eigen::Success) {
        throw SingularSystem("algebraic subsystem is singular at t = 0");
    }
    const Eigen::VectorXd dx = lu.solve(rhs);
    for (int i = 0; i < n; ++i) {
        if (alg_of[i] >= 0) x[i] += dx[alg_of[i]];
    }
}

}  // namespace

TransientSolution transient_solve(const Netlist& net, std::span<const PwlSource> sources,
                                  const TransientOptions& options,
                                  std::span<const NodeId> monitored) {
    if (!(options.dt > 0.0)) throw InvalidArgument("transient dt must be positive");
    if (!(options.t_end >= options.dt)) throw InvalidArgument("transient t_end must be >= dt");
    for (const PwlSource& s : sources) {
        s.validate();
        if (s.node <= 0 || s.node >= net.node_count()) {
            throw InvalidArgument(fmt::format("current source attached to invalid node {}", s.node));
        }
    }
    for (NodeId n : monitored) {
        if (n <= 0 || n >= net.node_count()) {
            throw InvalidArgument(fmt::format("monitored node {} is not a circuit node", n));
        }
    }

    const TransientSystem sys = mna_assemble_transient(net, options.loss_eval_frequency);
    const double h = options.dt;
    const auto steps = static_cast<long>(std::ceil(options.t_end / h - 1e-9));

    // Quiescent operating point: capacitors open, PWL sources off.
    Eigen::SparseLU<RealSparse> dc;
    RealSparse g = sys.g;
    g.makeCompressed();
    dc.compute(g);
    if (dc.info() != Eigen::Success) {
        throw SingularSystem("DC operating point matrix is singular");
    }
    Eigen::VectorXd x = dc.solve(sys.rhs);

    RealSparse a = sys.c / h + sys.g * 0.5;
    RealSparse b = sys.c / h - sys.g * 0.5;
    a.makeCompressed();
    Eigen::SparseLU<RealSparse> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw SingularSystem("transient companion matrix is singular");
    }

    std::vector<PwlCursor> cursors;
    cursors.reserve(sources.size());
    for (const PwlSource& s : sources) cursors.emplace_back(s);
    auto excitation = [&](double t) {
        Eigen::VectorXd e = sys.rhs;
        for (std::size_t k = 0; k < sources.size(); ++k) {
            e[MnaIndex::row(sources[k].node)] -= cursors[k].at(t);
        }
        return e;
    };

    TransientSolution sol;
    sol.nodes.assign(monitored.begin(), monitored.end());
    for (NodeId n : monitored) sol.labels.push_back(net.label(n).name);
    sol.times.resize(static_cast<std::size_t>(steps) + 1);
    sol.voltages.assign(monitored.size(), std::vector<double>(sol.times.size()));
    auto record = [&](long k) {
        sol.times[k] = static_cast<double>(k) * h;
        for (std::size_t m = 0; m < monitored.size(); ++m) {
            sol.voltages[m][k] = x[MnaIndex::row(monitored[m])];
        }
    };

    Eigen::VectorXd prev = excitation(0.0);
    make_consistent(sys, prev, x);
    record(0);
    for (long k = 1; k <= steps; ++k) {
        Eigen::VectorXd next = excitation(static_cast<double>(k) * h);
        Eigen::VectorXd rhs = b * x + 0.5 * (prev + next);
        x = lu.solve(rhs);
        if (!x.allFinite()) {
            throw Divergence(fmt::format("non-finite solution at step {} (t = {:.6e} s)", k,
                                         static_cast<double>(k) * h));
        }
        record(k);
        prev = std::move(next);
    }
    return sol;
}

}  // namespace pdn::circuit

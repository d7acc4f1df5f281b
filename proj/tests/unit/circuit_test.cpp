#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pdn/circuit/ac.hpp"
#include "pdn/circuit/mna.hpp"
#include "pdn/circuit/pwl.hpp"
#include "pdn/circuit/transient.hpp"
#include "pdn/error.hpp"
#include "pdn/model.hpp"
#include "support/dense_oracle.hpp"
#include "support/fixtures.hpp"

using namespace pdn;
using namespace pdn::circuit;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

Netlist resistor_to_ground(double r) {
    Netlist n;
    NodeId a = test::add_plain_node(n, "a");
    n.add_branch({BranchKind::Resistor, a, kGround, r});
    return n;
}

Netlist grid_with_supply(GridDims d, bool decaps) {
    Floorplan fp = test::make_floorplan(d, {{0, 0}});
    fp.chiplets.push_back(test::make_chiplet("x", {0, 0}, d));
    PdnParams p;
    Netlist n = assemble_hierarchy(fp, p);
    if (decaps) {
        DecapLayout l = DecapLayout::empty_for(fp);
        int k = 0;
        for (auto s : feasible_sites(fp)) level_at(l, s) = (k++ % 10) + 1;
        n = apply_decaps(n, fp, l, p);
    }
    return n;
}

}  // namespace

TEST_CASE("mna: single resistor to ground") {
    AcSystem s = mna_assemble_ac(resistor_to_ground(4.0), 1e9);
    REQUIRE(s.matrix.rows() == 1);
    CHECK(s.matrix.coeff(0, 0) == Complex{0.25, 0.0});
}

TEST_CASE("mna: series R-L auxiliary row") {
    Netlist n;
    NodeId a = test::add_plain_node(n, "a");
    n.add_branch({BranchKind::Inductor, a, kGround, 2e-9, 3.0});
    const double f = 1e8;
    AcSystem s = mna_assemble_ac(n, f);
    REQUIRE(s.matrix.rows() == 2);
    const double w = 2 * std::numbers::pi * f;
    CHECK(s.matrix.coeff(0, 1) == Complex{1.0, 0.0});
    CHECK(s.matrix.coeff(1, 0) == Complex{1.0, 0.0});
    CHECK(std::abs(s.matrix.coeff(1, 1) - Complex{-3.0, -w * 2e-9}) < 1e-12);
}

TEST_CASE("mna: empty and floating netlists rejected") {
    CHECK_THROWS_AS(mna_assemble_ac(Netlist{}, 1e9), InvalidArgument);
    Netlist n;
    NodeId a = test::add_plain_node(n, "a");
    NodeId b = test::add_plain_node(n, "island");
    n.add_branch({BranchKind::Resistor, a, kGround, 1.0});
    n.add_branch({BranchKind::Capacitor, b, kGround, 1e-9});
    CHECK_THROWS_WITH_AS(mna_assemble_ac(n, 1e9), doctest::Contains("island"), SingularSystem);
    CHECK_THROWS_AS(mna_assemble_transient(n, 1e9), SingularSystem);
}

TEST_CASE("ac: ideal capacitor impedance is 1/(wC)") {
    Netlist n;
    NodeId a = test::add_plain_node(n, "a");
    n.add_branch({BranchKind::Capacitor, a, kGround, 1e-9});
    n.add_branch({BranchKind::Resistor, a, kGround, 1e15});  // DC path
    std::vector<Port> ports{{"a", a}};
    std::vector<double> f{159.154943e6};
    AcSolution s = ac_port_impedance(n, ports, f);
    CHECK(std::abs(s.z[0][0]) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ac: series RLC at resonance is purely resistive") {
    Netlist n;
    NodeId a = test::add_plain_node(n, "a");
    NodeId m = test::add_plain_node(n, "m");
    n.add_branch({BranchKind::Inductor, a, m, 1e-9, 1.0});
    n.add_branch({BranchKind::Capacitor, m, kGround, 1e-9});
    n.add_branch({BranchKind::Resistor, m, kGround, 1e18});
    const double f0 = 1.0 / (2 * std::numbers::pi * std::sqrt(1e-9 * 1e-9));
    std::vector<Port> ports{{"a", a}};
    std::vector<double> f{f0};
    AcSolution s = ac_port_impedance(n, ports, f);
    CHECK(s.z[0][0].real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(s.z[0][0].imag()) < 1e-8);
}

TEST_CASE("ac: matches dense nodal oracle on grids up to 5x5") {
    for (int d = 1; d <= 5; ++d) {
        for (bool decaps : {false, true}) {
            Netlist n = grid_with_supply({d, d}, decaps);
            std::vector<Port> ports{{"p0", n.chip_node(0, {0, 0})},
                                    {"p1", n.chip_node(0, {d - 1, d - 1})},
                                    {"p2", n.interposer_node({d / 2, 0})}};
            std::vector<NodeId> nodes{ports[0].node, ports[1].node, ports[2].node};
            AcSweep sweep(n, ports);
            for (double f : {1e8, 1e9, 3.4e9, 2e10}) {
                auto z = sweep.port_matrix(f);
                auto ref = test::oracle_port_impedance(n, nodes, f);
                for (int i = 0; i < 3; ++i) {
                    for (int j = 0; j < 3; ++j) CHECK(rel(z(i, j), ref[i][j]) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("ac: reciprocity and passivity") {
    Netlist n = grid_with_supply({4, 4}, true);
    std::vector<Port> ports{{"a", n.chip_node(0, {0, 0})}, {"b", n.chip_node(0, {3, 2})},
                            {"c", n.interposer_node({1, 3})}};
    AcSweep sweep(n, ports);
    for (double f : {1e8, 7e8, 5e9, 2e10}) {
        auto z = sweep.port_matrix(f);
        for (int i = 0; i < 3; ++i) {
            CHECK(z(i, i).real() >= 0.0);
            for (int j = 0; j < i; ++j) CHECK(rel(z(i, j), z(j, i)) < 1e-9);
        }
    }
}

TEST_CASE("ac: shunt capacitor lowers impedance well above resonance") {
    // 1-port: supply through series R-L, port node with small shunt C
    for (double extra : {10e-12, 100e-12, 1e-9}) {
        Netlist n;
        NodeId s = test::add_supply(n, 1.0);
        NodeId a = test::add_plain_node(n, "a");
        n.add_branch({BranchKind::Inductor, s, a, 50e-12, 5e-3});
        n.add_branch({BranchKind::Capacitor, a, kGround, 1e-12});
        Netlist with = n;
        with.add_branch({BranchKind::Capacitor, a, kGround, extra, 0.01});
        const double fres = 1.0 / (2 * std::numbers::pi * std::sqrt(50e-12 * (extra + 1e-12)));
        std::vector<Port> ports{{"a", a}};
        std::vector<double> f;
        for (double k = 10; k <= 100; k *= 1.5) f.push_back(k * fres);
        auto z0 = ac_port_impedance(n, ports, f);
        auto z1 = ac_port_impedance(with, ports, f);
        for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::abs(z1.z[0][k]) <= std::abs(z0.z[0][k]));
    }
}

TEST_CASE("pwl: interpolation and clamping") {
    PwlSource s{1, {{0.0, 0.0}, {1e-9, 1.0}, {2e-9, 0.0}}};
    CHECK(eval_pwl(s, 0.5e-9) == doctest::Approx(0.5));
    CHECK(eval_pwl(s, -1.0) == 0.0);
    CHECK(eval_pwl(s, 5e-9) == 0.0);
    PwlSource t{1, {{1e-9, 0.3}, {2e-9, 0.7}}};
    CHECK(eval_pwl(t, 0.0) == 0.3);
    CHECK(eval_pwl(t, 3e-9) == 0.7);
    PwlSource bad{1, {{1e-9, 0.0}, {1e-9, 1.0}}};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("transient: no sources keeps every node at vdd") {
    PdnParams p;
    p.loss_tangent = 0.0;
    p.vdd = 1.2;
    Floorplan fp = test::toy_floorplan();
    Netlist n = assemble_hierarchy(fp, p);
    auto mon = n.on_chip_nodes();
    TransientOptions opt;
    opt.t_end = 100e-12;
    auto sol = transient_solve(n, {}, opt, mon);
    CHECK(sol.times.size() == 101);
    for (const auto& trace : sol.voltages) {
        for (double v : trace) CHECK(v == doctest::Approx(1.2).epsilon(1e-12));
    }
}

TEST_CASE("transient: RC step response") {
    const double r = 2.0, c = 1e-9, vdd = 1.0, i0 = 0.1, tau = r * c;
    Netlist n;
    NodeId s = test::add_supply(n, vdd);
    NodeId a = test::add_plain_node(n, "a");
    n.add_branch({BranchKind::Resistor, s, a, r});
    n.add_branch({BranchKind::Capacitor, a, kGround, c});
    std::vector<PwlSource> src{{a, {{0.0, i0}}}};
    TransientOptions opt{tau / 1000, 5 * tau, 1e9};
    std::vector<NodeId> mon{a};
    auto sol = transient_solve(n, src, opt, mon);
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const double exact = vdd - i0 * r * (1 - std::exp(-sol.times[k] / tau));
        CHECK(std::abs(sol.voltages[0][k] - exact) / exact < 1e-4);
    }
}

TEST_CASE("transient: RL step response with algebraic node") {
    const double r = 0.5, l = 1e-9, vdd = 1.0, i0 = 0.2, tau = l / r;
    Netlist n;
    NodeId s = test::add_supply(n, vdd);
    NodeId a = test::add_plain_node(n, "a");
    n.add_branch({BranchKind::Resistor, s, a, r});
    n.add_branch({BranchKind::Inductor, s, a, l});
    std::vector<PwlSource> src{{a, {{0.0, i0}}}};
    TransientOptions opt{tau / 1000, 5 * tau, 1e9};
    std::vector<NodeId> mon{a};
    auto sol = transient_solve(n, src, opt, mon);
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const double dev = r * i0 * std::exp(-sol.times[k] / tau);
        CHECK(std::abs(sol.voltages[0][k] - (vdd - dev)) / (vdd - dev) < 1e-4);
        CHECK(std::abs((vdd - sol.voltages[0][k]) - dev) / dev < 1e-4);
    }
}

TEST_CASE("transient: rejects bad options and attachments") {
    Netlist n = resistor_to_ground(1.0);
    std::vector<NodeId> mon{1};
    CHECK_THROWS_AS(transient_solve(n, {}, {0.0, 1e-9, 1e9}, mon), InvalidArgument);
    CHECK_THROWS_AS(transient_solve(n, {}, {1e-9, 1e-10, 1e9}, mon), InvalidArgument);
    std::vector<PwlSource> src{{7, {{0.0, 1.0}}}};
    CHECK_THROWS_AS(transient_solve(n, src, {1e-12, 1e-11, 1e9}, mon), InvalidArgument);
}

TEST_CASE("transient: trapezoidal self-convergence is second order") {
    // Moderate-Q grid so every mode is resolved at the coarsest step.
    PdnParams p;
    p.r_chip = 0.5;
    p.l_chip = 10e-12;
    p.c_chip = 1e-12;
    Netlist n = build_unit_cell_grid({4, 4}, GridLayer::Chip, p);
    const NodeId vdd = test::add_supply(n, 1.0);
    n.add_branch({BranchKind::Inductor, vdd, n.chip_node(0, {0, 0}), 20e-12, 0.05});
    const NodeId probe = n.chip_node(0, {3, 3});
    std::vector<PwlSource> src{{probe, {{100e-12, 0.0}, {200e-12, 0.5}, {300e-12, 0.0}}}};
    std::vector<NodeId> mon{probe, n.chip_node(0, {1, 2})};
    auto run = [&](double dt) { return transient_solve(n, src, {dt, 1e-9, 3.4e9}, mon); };
    const auto coarse = run(0.5e-12), mid = run(0.25e-12), fine = run(0.125e-12);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t m = 0; m < mon.size(); ++m) {
        for (std::size_t k = 0; k < coarse.times.size(); ++k) {
            e1 = std::max(e1, std::abs(coarse.voltages[m][k] - mid.voltages[m][2 * k]));
            e2 = std::max(e2, std::abs(mid.voltages[m][2 * k] - fine.voltages[m][4 * k]));
        }
    }
    REQUIRE(e2 > 0.0);
    const double ratio = e1 / e2;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

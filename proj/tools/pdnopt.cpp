// pdnopt: command-line front end for modeling, analysis and decap optimization.

#include <iostream>

#include <CLI11.hpp>

#include "pdn/io/commands.hpp"

namespace {

void add_common(CLI::App* cmd, pdn::io::CommandOptions& o) {
    cmd->add_option("--case", o.case_path, "case file (YAML)")->required();
    cmd->add_option("--out-dir", o.out_dir, "parent directory for run directories")->capture_default_str();
    cmd->add_option("--seed", o.seed, "random seed (default 1)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2.5D PDN modeling, analysis and decap optimization"};
    app.require_subcommand(1);
    app.set_version_flag("--version", PDN_VERSION);
    pdn::io::CommandOptions o;

    auto* model = app.add_subcommand("model", "assemble the PDN and print a netlist summary");
    add_common(model, o);

    auto* ac = app.add_subcommand("ac", "impedance sweep against the target mask");
    add_common(ac, o);
    ac->add_option("--layout", o.layout_path, "decap layout JSON (default: no decaps)");

    auto* tran = app.add_subcommand("tran", "transient simulation and VVI for one current profile");
    add_common(tran, o);
    tran->add_option("--layout", o.layout_path, "decap layout JSON (default: no decaps)");
    tran->add_option("--rho", o.rho, "I/O current correlation")->expected(1);

    auto* opt = app.add_subcommand("opt", "optimize decaps");
    add_common(opt, o);
    opt->add_option("--phase", o.phase, "freq, time, ga or da")->required();
    opt->add_option("--layout", o.layout_path, "starting layout (required for the time phase)");
    opt->add_option("--budget", o.budget, "reward evaluations");
    opt->add_option("--gamma", o.gamma, "VVI tolerance ratio (time phase)");
    opt->add_option("--rho", o.rho, "profile correlation (time phase)")->expected(1);

    auto* sweep = app.add_subcommand("sweep-correlation", "mean total VVI across correlation values");
    add_common(sweep, o);
    sweep->add_option("--layout", o.layout_path, "decap layout JSON (default: no decaps)");
    sweep->add_option("--rho", o.rho, "correlation values")->expected(1, 64);
    sweep->add_option("--profiles", o.profiles, "profiles per correlation value");

    auto* report = app.add_subcommand("report", "capacitance, impedance and VVI summary of a layout");
    add_common(report, o);
    report->add_option("--layout", o.layout_path, "decap layout JSON (default: no decaps)");
    report->add_option("--rho", o.rho, "profile correlation")->expected(1);
    report->add_option("--profiles", o.profiles, "number of profiles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    o.verb = app.get_subcommands().front()->get_name();

    try {
        pdn::io::run_command(o, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pdn::io::exit_code_for(e);
    }
    return 0;
}

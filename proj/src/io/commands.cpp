#include "pdn/io/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include <fmt/format.h>

#include "pdn/baseline/optimize.hpp"
#include "pdn/circuit/ac.hpp"
#include "pdn/circuit/transient.hpp"
#include "pdn/error.hpp"
#include "pdn/io/artifacts.hpp"
#include "pdn/model.hpp"
#include "pdn/rl/env.hpp"
#include "pdn/rl/train.hpp"
#include "pdn/timing/vvi.hpp"

namespace pdn::io {

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

std::string utc_stamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

double nano(double farads) { return farads * 1e9; }

struct Context {
    const CommandOptions& opt;
    std::ostream& out;
    Case c;
    std::uint64_t seed;
    Json args;
    std::filesystem::path last_run;
};

Json args_json(const CommandOptions& o, std::uint64_t seed) {
    Json a;
    a["verb"] = o.verb;
    if (!o.phase.empty()) a["phase"] = o.phase;
    a["case"] = o.case_path.string();
    if (o.layout_path) a["layout"] = o.layout_path->string();
    a["seed"] = seed;
    if (!o.rho.empty()) a["rho"] = o.rho;
    if (o.gamma) a["gamma"] = *o.gamma;
    if (o.budget) a["budget"] = *o.budget;
    if (o.profiles) a["profiles"] = *o.profiles;
    return a;
}

RunDir open_run(Context& ctx, const std::string& tag) {
    const std::string stamp = ctx.opt.timestamp.empty() ? utc_stamp() : ctx.opt.timestamp;
    RunDir run(ctx.opt.out_dir, fmt::format("{}_{}_s{}_{}", ctx.c.name, tag, ctx.seed, stamp));
    run.add_input("case", ctx.opt.case_path);
    if (ctx.opt.layout_path) run.add_input("layout", *ctx.opt.layout_path);
    return run;
}

void close_run(Context& ctx, RunDir& run) {
    run.finish(ctx.opt.verb, ctx.args, case_to_json(ctx.c));
    ctx.last_run = run.path();
    ctx.out << "run directory: " << run.path().string() << "\n";
}

DecapLayout layout_or_empty(const Context& ctx) {
    if (ctx.opt.layout_path) return load_layout(ctx.c.floorplan, *ctx.opt.layout_path);
    return DecapLayout::empty_for(ctx.c.floorplan);
}

double single_rho(const Context& ctx) {
    if (ctx.opt.rho.size() > 1) throw InvalidArgument("this command takes a single --rho");
    const double rho = ctx.opt.rho.empty() ? ctx.c.time.train_rho : ctx.opt.rho.front();
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument(fmt::format("rho {} outside [0, 1]", rho));
    return rho;
}

circuit::TransientOptions transient_options(const Case& c) {
    circuit::TransientOptions t;
    t.dt = c.time.dt;
    t.t_end = c.time.window;
    t.loss_eval_frequency = c.target.f_knee();
    return t;
}

Json capacitance_json(const Case& c, const DecapLayout& layout) {
    Json j;
    j["mim_nf"] = nano(layout.total_mim());
    j["mos_nf"] = nano(layout.total_mos());
    Json per = Json::object();
    for (std::size_t k = 0; k < c.floorplan.chiplets.size(); ++k) {
        long levels = 0;
        for (int v : layout.mos[k]) levels += v;
        per[c.floorplan.chiplets[k].name] = nano(static_cast<double>(levels) * kMosStep);
    }
    j["mos_nf_by_chiplet"] = std::move(per);
    return j;
}

struct AcOutcome {
    circuit::AcSolution ac;
    std::vector<double> excess;
    bool compliant = false;
    double worst = 0.0;
    std::size_t worst_index = 0;
    double reward = 0.0;
};

AcOutcome run_ac(const Case& c, const DecapLayout& layout) {
    const Netlist net = apply_decaps(assemble_hierarchy(c.floorplan, c.params), c.floorplan, layout, c.params);
    if (net.ports().empty()) throw PreconditionError("case has no probe ports for impedance analysis");
    AcOutcome o;
    const auto freqs = c.sweep.frequencies();
    o.ac = circuit::ac_port_impedance(net, net.ports(), freqs);
    o.excess = freq::mask_violation(o.ac, c.target);
    o.compliant = freq::is_compliant(o.excess);
    for (std::size_t i = 0; i < o.excess.size(); ++i) {
        if (i == 0 || o.excess[i] > o.worst) {
            o.worst = o.excess[i];
            o.worst_index = i;
        }
    }
    o.reward = freq::freq_reward(o.excess, layout, c.floorplan, c.opt.weights);
    return o;
}

Json ac_json(const AcOutcome& o) {
    return {{"compliant", o.compliant},
            {"worst_excess_ohm", o.worst},
            {"worst_frequency_hz", o.ac.frequencies[o.worst_index]},
            {"total_violation_ohm", freq::total_violation(o.excess)},
            {"reward", o.reward}};
}

void print_ac(std::ostream& out, const AcOutcome& o) {
    out << fmt::format("verdict: {}\n", o.compliant ? "compliant" : "non-compliant");
    out << fmt::format("worst excess: {:.6g} ohm at {:.6g} Hz\n", o.worst, o.ac.frequencies[o.worst_index]);
    out << fmt::format("reward: {:.6g}\n", o.reward);
}

// Summed VVI over profiles, reported per node and per chiplet grid.
struct VviOutcome {
    timing::VviReport report;
    std::vector<Grid<double>> grids;
};

VviOutcome run_vvi(const Case& c, const Netlist& net, const std::vector<timing::CurrentProfile>& profiles,
                   circuit::TransientSolution* first_solution) {
    const std::vector<NodeId> monitored = net.on_chip_nodes();
    const auto spec = c.vvi_spec();
    VviOutcome o;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const auto sources = profiles[k].all();
        auto sol = circuit::transient_solve(net, sources, transient_options(c), monitored);
        const auto rep = timing::vvi_report(sol, spec);
        if (k == 0) {
            o.report.labels = rep.labels;
            o.report.per_node.assign(rep.per_node.size(), 0.0);
            if (first_solution) *first_solution = std::move(sol);
        }
        for (std::size_t i = 0; i < rep.per_node.size(); ++i) o.report.per_node[i] += rep.per_node[i];
    }
    std::size_t i = 0;
    for (const Chiplet& chip : c.floorplan.chiplets) {
        Grid<double> g(chip.dims, 0.0);
        for (double& v : g) v = o.report.per_node[i++];
        o.grids.push_back(std::move(g));
    }
    for (double v : o.report.per_node) {
        o.report.total += v;
        if (v > 0.0) ++o.report.violation_nodes;
    }
    return o;
}

void cmd_model(Context& ctx) {
    const Case& c = ctx.c;
    const Netlist net = assemble_hierarchy(c.floorplan, c.params);
    net.validate();
    Json s;
    s["case"] = c.name;
    s["chiplets"] = c.floorplan.chiplets.size();
    s["nodes"] = net.node_count() - 1;
    Json br = Json::object();
    for (BranchKind k : {BranchKind::Resistor, BranchKind::Inductor, BranchKind::Capacitor,
                         BranchKind::LossConductance, BranchKind::VoltageSource, BranchKind::CurrentSource}) {
        br[to_string(k)] = net.count(k);
    }
    s["branches"] = std::move(br);
    s["branch_total"] = net.branches().size();
    s["ports"] = Json::array();
    for (const Port& p : net.ports()) s["ports"].push_back(p.name);
    s["udc_sites"] = {{"interposer", c.floorplan.feasible_interposer_count()},
                      {"chip", c.floorplan.feasible_chip_count()}};
    s["tsv_sites"] = c.floorplan.tsv_sites.size();

    std::string labels = "node,name,layer,chiplet,row,col\n";
    for (NodeId n = 1; n < net.node_count(); ++n) {
        const NodeLabel& l = net.label(n);
        const char* layer = l.layer == Layer::Chip ? "chip" : l.layer == Layer::Interposer ? "interposer" : "internal";
        labels += fmt::format("{},{},{},{},{},{}\n", n, l.name, layer,
                              l.chiplet >= 0 ? c.floorplan.chiplets[l.chiplet].name : "", l.at.row, l.at.col);
    }
    std::ostringstream listing;
    net.write_listing(listing);

    ctx.out << fmt::format("case {}: {} chiplets, {} nodes, {} branches, {} ports\n", c.name,
                           c.floorplan.chiplets.size(), net.node_count() - 1, net.branches().size(),
                           net.ports().size());
    for (const auto& [kind, n] : s["branches"].items()) ctx.out << fmt::format("  {}: {}\n", kind, n.get<int>());

    RunDir run = open_run(ctx, "model");
    run.write_json("summary.json", s);
    run.write("labels.csv", labels);
    run.write("netlist.txt", listing.str());
    close_run(ctx, run);
}

void cmd_ac(Context& ctx) {
    const DecapLayout layout = layout_or_empty(ctx);
    const AcOutcome o = run_ac(ctx.c, layout);
    print_ac(ctx.out, o);
    Json rep = ac_json(o);
    rep["capacitance"] = capacitance_json(ctx.c, layout);
    RunDir run = open_run(ctx, "ac");
    run.write("impedance.csv", impedance_csv(o.ac, ctx.c.target));
    run.write_json("ac_report.json", rep);
    close_run(ctx, run);
}

void cmd_tran(Context& ctx) {
    const Case& c = ctx.c;
    const DecapLayout layout = layout_or_empty(ctx);
    const double rho = single_rho(ctx);
    const Netlist base = assemble_hierarchy(c.floorplan, c.params);
    const auto profiles = make_profiles(c, base, rho, ctx.seed, 1);
    const Netlist net = apply_decaps(base, c.floorplan, layout, c.params);
    circuit::TransientSolution sol;
    const VviOutcome o = run_vvi(c, net, profiles, &sol);

    ctx.out << fmt::format("total VVI: {:.6g} V*s over {} violating nodes (rho {}, seed {})\n", o.report.total,
                           o.report.violation_nodes, rho, ctx.seed);
    Json rep = {{"rho", rho},
                {"profile_seed", ctx.seed},
                {"total_vvi_vs", o.report.total},
                {"violation_nodes", o.report.violation_nodes},
                {"v_min", c.vvi_spec().v_min},
                {"v_max", c.vvi_spec().v_max},
                {"capacitance", capacitance_json(c, layout)}};
    RunDir run = open_run(ctx, "tran");
    run.write("waveform.csv", waveform_csv(sol));
    run.write("vvi.csv", vvi_csv(o.report));
    run.write_json("vvi_grid.json", vvi_grid_json(c.floorplan, o.grids));
    run.write_json("tran_report.json", rep);
    close_run(ctx, run);
}

void cmd_opt_freq(Context& ctx, RunDir& run, Json& rep) {
    const Case& c = ctx.c;
    const long budget = ctx.opt.budget.value_or(c.opt.budget);
    rl::FreqEvaluator ev(c.floorplan, c.params, c.target, c.opt.weights, c.sweep.frequencies());
    rl::FreqEnv env(ev, c.opt.ppo.episode_steps);
    const rl::TrainResult r = rl::train_freq(env, c.opt.ppo, budget, ctx.seed);
    const AcOutcome best = run_ac(c, r.best_layout);
    print_ac(ctx.out, best);

    rep["method"] = "ppo";
    rep["budget"] = budget;
    rep["evaluations"] = r.evaluations;
    rep["episodes"] = r.curve.size();
    rep["best_reward"] = r.best_reward;
    rep["ac"] = ac_json(best);
    rep["capacitance"] = capacitance_json(c, r.best_layout);
    run.write_json("best_layout.json", layout_to_json(c.floorplan, r.best_layout));
    run.write("curve.csv", curve_csv(r.curve));
    run.write_diagnostic("timing.csv", timing_csv(r.curve));
    std::ostringstream net;
    r.network.save(net);
    run.write("policy.txt", net.str());
}

void cmd_opt_baseline(Context& ctx, RunDir& run, Json& rep, baseline::Method method) {
    const Case& c = ctx.c;
    baseline::BaselineConfig cfg = c.opt.baseline;
    cfg.method = method;
    cfg.seed = ctx.seed;
    cfg.budget = ctx.opt.budget.value_or(c.opt.budget);
    rl::FreqEvaluator ev(c.floorplan, c.params, c.target, c.opt.weights, c.sweep.frequencies());
    const baseline::BaselineResult r = baseline::optimize(c.floorplan, baseline::freq_cost(ev), cfg);
    const AcOutcome best = run_ac(c, r.best_layout);
    print_ac(ctx.out, best);

    rep["method"] = method == baseline::Method::GA ? "ga" : "da";
    rep["budget"] = cfg.budget;
    rep["evaluations"] = r.evaluations;
    rep["best_cost"] = r.best_cost;
    rep["best_reward"] = -r.best_cost;
    rep["ac"] = ac_json(best);
    rep["capacitance"] = capacitance_json(c, r.best_layout);
    run.write_json("best_layout.json", layout_to_json(c.floorplan, r.best_layout));
    run.write("history.csv", history_csv(r));
}

void cmd_opt_time(Context& ctx, RunDir& run, Json& rep, const DecapLayout& start) {
    const Case& c = ctx.c;
    const long budget = ctx.opt.budget.value_or(c.opt.time_budget);
    const double gamma = ctx.opt.gamma.value_or(c.opt.gamma);
    const double rho = single_rho(ctx);
    const Netlist base = assemble_hierarchy(c.floorplan, c.params);
    const auto profiles = make_profiles(c, base, rho, c.time.seed, c.time.profiles);
    rl::TimeEvaluator ev(c.floorplan, c.params, profiles, c.vvi_spec(), transient_options(c));
    rl::TimeEnv env(ev, start, gamma, c.opt.ppo.episode_steps);
    const rl::TrainResult r = rl::train_time(env, c.opt.ppo, budget, ctx.seed);
    const rl::TimeEvaluation best = ev.evaluate(r.best_layout);

    ctx.out << fmt::format("total VVI: {:.6g} -> {:.6g} V*s, violating nodes {} -> {} (gamma {})\n",
                           env.initial().total, best.total, env.initial().violation_nodes,
                           best.violation_nodes, gamma);
    rep["method"] = "ppo";
    rep["budget"] = budget;
    rep["gamma"] = gamma;
    rep["rho"] = rho;
    rep["profiles"] = c.time.profiles;
    rep["evaluations"] = r.evaluations;
    rep["episodes"] = r.curve.size();
    rep["best_reward"] = r.best_reward;
    rep["tolerance_met"] = r.best_success;
    rep["initial_total_vvi_vs"] = env.initial().total;
    rep["initial_violation_nodes"] = env.initial().violation_nodes;
    rep["total_vvi_vs"] = best.total;
    rep["violation_nodes"] = best.violation_nodes;
    rep["capacitance"] = capacitance_json(c, r.best_layout);
    run.write_json("best_layout.json", layout_to_json(c.floorplan, r.best_layout));
    run.write("curve.csv", curve_csv(r.curve));
    run.write_diagnostic("timing.csv", timing_csv(r.curve));
    run.write_json("vvi_initial.json", vvi_grid_json(c.floorplan, env.initial().grids));
    run.write_json("vvi_final.json", vvi_grid_json(c.floorplan, best.grids));
    std::ostringstream net;
    r.network.save(net);
    run.write("policy.txt", net.str());
}

void cmd_opt(Context& ctx) {
    const std::string& phase = ctx.opt.phase;
    if (phase != "freq" && phase != "time" && phase != "ga" && phase != "da") {
        throw InvalidArgument(fmt::format("unknown phase '{}' (expected freq, time, ga or da)", phase));
    }
    DecapLayout start;
    if (phase == "time") {
        if (!ctx.opt.layout_path) {
            throw PreconditionError("the time phase starts from a frequency-phase layout; pass --layout");
        }
        start = load_layout(ctx.c.floorplan, *ctx.opt.layout_path);
    }
    Json rep;
    rep["phase"] = phase;
    rep["seed"] = ctx.seed;
    RunDir run = open_run(ctx, phase);
    if (phase == "freq") cmd_opt_freq(ctx, run, rep);
    else if (phase == "ga") cmd_opt_baseline(ctx, run, rep, baseline::Method::GA);
    else if (phase == "da") cmd_opt_baseline(ctx, run, rep, baseline::Method::DA);
    else cmd_opt_time(ctx, run, rep, start);
    ctx.out << fmt::format("capacitance: MIM {:.6g} nF, MOS {:.6g} nF\n", rep["capacitance"]["mim_nf"].get<double>(),
                           rep["capacitance"]["mos_nf"].get<double>());
    run.write_json("opt_report.json", rep);
    close_run(ctx, run);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void cmd_sweep(Context& ctx) {
    const Case& c = ctx.c;
    const DecapLayout layout = layout_or_empty(ctx);
    const std::vector<double> rhos = ctx.opt.rho.empty() ? c.time.rho : ctx.opt.rho;
    const int count = ctx.opt.profiles.value_or(c.time.profiles);
    if (count <= 0) throw InvalidArgument("profile count must be positive");
    for (double r : rhos) {
        if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument(fmt::format("rho {} outside [0, 1]", r));
    }
    const Netlist base = assemble_hierarchy(c.floorplan, c.params);
    const Netlist net = apply_decaps(base, c.floorplan, layout, c.params);

    std::string summary = "rho,mean_total_vvi_vs,std_total_vvi_vs,profiles\n";
    std::string detail = "rho,profile,seed,total_vvi_vs,violation_nodes\n";
    for (double rho : rhos) {
        const auto profiles = make_profiles(c, base, rho, ctx.seed, count);
        std::vector<double> totals;
        for (int k = 0; k < count; ++k) {
            const VviOutcome o = run_vvi(c, net, {profiles[static_cast<std::size_t>(k)]}, nullptr);
            totals.push_back(o.report.total);
            detail += fmt::format("{},{},{},{},{}\n", num(rho), k, ctx.seed + static_cast<std::uint64_t>(k),
                                  num(o.report.total), o.report.violation_nodes);
        }
        const double m = mean_of(totals);
        const double s = sample_std(totals, m);
        summary += fmt::format("{},{},{},{}\n", num(rho), num(m), num(s), count);
        ctx.out << fmt::format("rho {}: mean total VVI {:.6g} V*s (std {:.3g}, {} profiles)\n", rho, m, s, count);
    }
    RunDir run = open_run(ctx, "sweep-correlation");
    run.write("correlation.csv", summary);
    run.write("profiles.csv", detail);
    close_run(ctx, run);
}

void cmd_report(Context& ctx) {
    const Case& c = ctx.c;
    const DecapLayout layout = layout_or_empty(ctx);
    const double rho = single_rho(ctx);
    const int count = ctx.opt.profiles.value_or(c.time.profiles);
    const AcOutcome ac = run_ac(c, layout);
    const Netlist base = assemble_hierarchy(c.floorplan, c.params);
    const auto profiles = make_profiles(c, base, rho, c.time.seed, count);
    const VviOutcome vvi = run_vvi(c, apply_decaps(base, c.floorplan, layout, c.params), profiles, nullptr);

    Json rep;
    rep["case"] = c.name;
    rep["chiplets"] = c.floorplan.chiplets.size();
    rep["capacitance"] = capacitance_json(c, layout);
    rep["capacitance"]["mim_max_nf"] = nano(max_mim_capacitance(c.floorplan));
    rep["capacitance"]["mos_max_nf"] = nano(max_mos_capacitance(c.floorplan));
    rep["ac"] = ac_json(ac);
    rep["transient"] = {{"rho", rho},
                        {"profiles", count},
                        {"total_vvi_vs", vvi.report.total},
                        {"violation_nodes", vvi.report.violation_nodes}};

    std::string text = fmt::format("case: {}\n", c.name);
    text += fmt::format("MIM: {:.6g} nF of {:.6g} nF\n", rep["capacitance"]["mim_nf"].get<double>(),
                        rep["capacitance"]["mim_max_nf"].get<double>());
    text += fmt::format("MOS: {:.6g} nF of {:.6g} nF\n", rep["capacitance"]["mos_nf"].get<double>(),
                        rep["capacitance"]["mos_max_nf"].get<double>());
    text += fmt::format("impedance: {} (worst excess {:.6g} ohm, reward {:.6g})\n",
                        ac.compliant ? "compliant" : "non-compliant", ac.worst, ac.reward);
    text += fmt::format("VVI: {:.6g} V*s over {} nodes ({} profiles, rho {})\n", vvi.report.total,
                        vvi.report.violation_nodes, count, rho);
    ctx.out << text;

    RunDir run = open_run(ctx, "report");
    run.write_json("report.json", rep);
    run.write("report.txt", text);
    run.write("impedance.csv", impedance_csv(ac.ac, c.target));
    run.write("vvi.csv", vvi_csv(vvi.report));
    close_run(ctx, run);
}

}  // namespace

std::vector<timing::CurrentProfile> make_profiles(const Case& c, const Netlist& base, double rho,
                                                  std::uint64_t first_seed, int count) {
    const timing::SourceNodes nodes = timing::source_nodes(base, c.floorplan, c.time.io_sources_per_chiplet);
    timing::PulseOptions pulses = c.time.pulses;
    pulses.window = c.time.window;
    std::vector<timing::CurrentProfile> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        out.push_back(timing::generate_profile(nodes.internal, nodes.io, rho, c.target.i_ref(),
                                               first_seed + static_cast<std::uint64_t>(k), pulses));
    }
    return out;
}

std::filesystem::path run_command(const CommandOptions& options, std::ostream& out) {
    Context ctx{options, out, load_case(options.case_path), options.seed.value_or(kDefaultSeed), {}, {}};
    ctx.args = args_json(options, ctx.seed);
    const std::string& v = options.verb;
    if (v == "model") cmd_model(ctx);
    else if (v == "ac") cmd_ac(ctx);
    else if (v == "tran") cmd_tran(ctx);
    else if (v == "opt") cmd_opt(ctx);
    else if (v == "sweep-correlation") cmd_sweep(ctx);
    else if (v == "report") cmd_report(ctx);
    else throw InvalidArgument(fmt::format("unknown command '{}'", v));
    return ctx.last_run;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const CaseFileError*>(&e)) return 3;
    if (dynamic_cast<const IoError*>(&e)) return 4;
    if (dynamic_cast<const PreconditionError*>(&e)) return 5;
    if (dynamic_cast<const InvalidFloorplan*>(&e) || dynamic_cast<const LayoutViolation*>(&e) ||
        dynamic_cast<const InvalidArgument*>(&e)) {
        return 6;
    }
    if (dynamic_cast<const SingularSystem*>(&e) || dynamic_cast<const Divergence*>(&e) ||
        dynamic_cast<const NumericFault*>(&e)) {
        return 7;
    }
    return 1;
}

}  // namespace pdn::io

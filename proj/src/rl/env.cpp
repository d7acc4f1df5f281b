#include "pdn/rl/env.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pdn/circuit/ac.hpp"
#include "pdn/error.hpp"
#include "pdn/model.hpp"

namespace pdn::rl {

FreqEvaluator::FreqEvaluator(Floorplan fp, PdnParams params, freq::TargetImpedanceSpec target,
                             freq::RewardWeights weights, std::vector<double> frequencies)
    : fp_(std::move(fp)), params_(params), target_(target), weights_(weights),
      freqs_(std::move(frequencies)) {
    target_.validate();
    weights_.validate();
    if (fp_.probes.empty()) throw InvalidArgument("frequency evaluation needs at least one probe port");
    base_ = assemble_hierarchy(fp_, params_);
}

FreqEvaluation FreqEvaluator::evaluate(const DecapLayout& layout) {
    ++evaluations_;
    const Netlist net = apply_decaps(base_, fp_, layout, params_);
    const auto ac = circuit::ac_port_impedance(net, net.ports(), freqs_);
    const auto excess = freq::mask_violation(ac, target_);
    FreqEvaluation e;
    e.compliant = freq::is_compliant(excess);
    e.worst_excess = *std::max_element(excess.begin(), excess.end());
    e.reward = freq::freq_reward(excess, layout, fp_, weights_);
    return e;
}

FreqEnv::FreqEnv(FreqEvaluator& evaluator, int max_steps)
    : eval_(&evaluator), max_steps_(max_steps), sites_(feasible_sites(evaluator.floorplan())) {
    if (max_steps <= 0) throw InvalidArgument("episode step cap must be positive");
    if (sites_.empty()) throw InvalidArgument("floorplan has no feasible UDC");
}

StepResult FreqEnv::reset() { return reset(DecapLayout::empty_for(eval_->floorplan())); }

StepResult FreqEnv::reset(const DecapLayout& start) {
    start.validate(eval_->floorplan());
    layout_ = start;
    steps_ = 0;
    last_ = {};
    return {encode_freq_state(eval_->floorplan(), layout_), 0.0, false, false};
}

StepResult FreqEnv::step(const ActionVector& action) {
    layout_ = apply_action(layout_, sites_, action);
    ++steps_;
    last_ = eval_->evaluate(layout_);
    StepResult r;
    r.state = encode_freq_state(eval_->floorplan(), layout_);
    r.reward = last_.reward;
    r.success = last_.compliant;
    r.done = r.success || steps_ >= max_steps_;
    return r;
}

TimeEvaluator::TimeEvaluator(Floorplan fp, PdnParams params,
                             std::vector<timing::CurrentProfile> profiles, timing::VviSpec vvi,
                             circuit::TransientOptions transient)
    : fp_(std::move(fp)), params_(params), profiles_(std::move(profiles)), vvi_(vvi),
      transient_(transient) {
    vvi_.validate(params_.vdd);
    if (profiles_.empty()) throw InvalidArgument("time evaluation needs at least one current profile");
    base_ = assemble_hierarchy(fp_, params_);
}

TimeEvaluation TimeEvaluator::evaluate(const DecapLayout& layout) {
    ++evaluations_;
    const Netlist net = apply_decaps(base_, fp_, layout, params_);
    const std::vector<NodeId> monitored = net.on_chip_nodes();
    std::vector<double> per_node(monitored.size(), 0.0);
    for (const auto& profile : profiles_) {
        const auto sources = profile.all();
        const auto sol = circuit::transient_solve(net, sources, transient_, monitored);
        const auto rep = timing::vvi_report(sol, vvi_);
        for (std::size_t i = 0; i < per_node.size(); ++i) per_node[i] += rep.per_node[i];
    }
    TimeEvaluation e;
    std::size_t i = 0;
    for (const Chiplet& chip : fp_.chiplets) {
        Grid<double> g(chip.dims, 0.0);
        for (double& v : g) v = per_node[i++];
        e.grids.push_back(std::move(g));
    }
    for (double v : per_node) {
        e.total += v;
        if (v > 0.0) ++e.violation_nodes;
    }
    return e;
}

TimeEnv::TimeEnv(TimeEvaluator& evaluator, DecapLayout start, double gamma, int max_steps)
    : eval_(&evaluator), start_(std::move(start)), gamma_(gamma), max_steps_(max_steps),
      sites_(feasible_sites(evaluator.floorplan(), false, true)) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument(fmt::format("gamma must lie in [0, 1], got {}", gamma));
    if (max_steps <= 0) throw InvalidArgument("episode step cap must be positive");
    if (sites_.empty()) throw InvalidArgument("floorplan has no feasible on-chip UDC");
    start_.validate(evaluator.floorplan());
    init_ = eval_->evaluate(start_);
    if (!(init_.total > 0.0)) {
        throw PreconditionError("start layout has no voltage violation; time-phase optimization is moot");
    }
    for (const auto& g : init_.grids) {
        for (double v : g) scale_ = std::max(scale_, v);
    }
}

double TimeEnv::reward_of(const TimeEvaluation& e, const DecapLayout& layout) const {
    return timing::time_reward(e.total, init_.total, layout.total_mos(),
                               max_mos_capacitance(eval_->floorplan()), gamma_);
}

StepResult TimeEnv::make_result(double reward) {
    StepResult r;
    r.state = encode_time_state(eval_->floorplan(), layout_, last_.grids, scale_);
    r.reward = reward;
    return r;
}

StepResult TimeEnv::reset() {
    layout_ = start_;
    last_ = init_;
    steps_ = 0;
    return make_result(0.0);
}

StepResult TimeEnv::step(const ActionVector& action) {
    layout_ = apply_action(layout_, sites_, action);
    ++steps_;
    last_ = eval_->evaluate(layout_);
    StepResult r = make_result(reward_of(last_, layout_));
    r.success = last_.total <= gamma_ * init_.total;
    r.done = r.success || steps_ >= max_steps_;
    return r;
}

}  // namespace pdn::rl

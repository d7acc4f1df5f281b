#pragma once

#include <vector>

#include "pdn/circuit/transient.hpp"
#include "pdn/floorplan.hpp"
#include "pdn/freq/target.hpp"
#include "pdn/layout.hpp"
#include "pdn/netlist.hpp"
#include "pdn/params.hpp"
#include "pdn/rl/state.hpp"
#include "pdn/timing/currents.hpp"
#include "pdn/timing/vvi.hpp"

namespace pdn::rl {

struct StepResult {
    StateTensor state;
    double reward = 0.0;
    bool done = false;
    bool success = false;  // mask met (frequency) or tolerance met (time)
};

struct FreqEvaluation {
    double reward = 0.0;
    bool compliant = false;
    double worst_excess = 0.0;  // max over frequencies of |Z| - Z_target
};

/// Evaluates frequency-domain reward of layouts on one floorplan. The
/// undecorated hierarchy is assembled once.
class FreqEvaluator {
public:
    FreqEvaluator(Floorplan fp, PdnParams params, freq::TargetImpedanceSpec target,
                  freq::RewardWeights weights, std::vector<double> frequencies);

    FreqEvaluation evaluate(const DecapLayout& layout);
    [[nodiscard]] long evaluations() const { return evaluations_; }
    [[nodiscard]] const Floorplan& floorplan() const { return fp_; }
    [[nodiscard]] const Netlist& base() const { return base_; }

private:
    Floorplan fp_;
    PdnParams params_;
    freq::TargetImpedanceSpec target_;
    freq::RewardWeights weights_;
    std::vector<double> freqs_;
    Netlist base_;
    long evaluations_ = 0;
};

/// Frequency-phase MDP over every feasible UDC (interposer then chips).
class FreqEnv {
public:
    FreqEnv(FreqEvaluator& evaluator, int max_steps);

    StepResult reset();  // empty layout
    StepResult reset(const DecapLayout& start);
    StepResult step(const ActionVector& action);

    [[nodiscard]] const DecapLayout& layout() const { return layout_; }
    [[nodiscard]] const std::vector<UdcSite>& sites() const { return sites_; }
    [[nodiscard]] const FreqEvaluation& last() const { return last_; }
    [[nodiscard]] int steps() const { return steps_; }

private:
    FreqEvaluator* eval_;
    int max_steps_;
    std::vector<UdcSite> sites_;
    DecapLayout layout_;
    FreqEvaluation last_;
    int steps_ = 0;
};

struct TimeEvaluation {
    double total = 0.0;               // summed over profiles and monitored nodes
    std::vector<Grid<double>> grids;  // per-chiplet per-node VVI
    int violation_nodes = 0;
};

/// Transient VVI of layouts under a frozen set of current profiles,
/// monitoring every on-chip node.
class TimeEvaluator {
public:
    TimeEvaluator(Floorplan fp, PdnParams params, std::vector<timing::CurrentProfile> profiles,
                  timing::VviSpec vvi, circuit::TransientOptions transient);

    TimeEvaluation evaluate(const DecapLayout& layout);
    [[nodiscard]] long evaluations() const { return evaluations_; }
    [[nodiscard]] const Floorplan& floorplan() const { return fp_; }

private:
    Floorplan fp_;
    PdnParams params_;
    std::vector<timing::CurrentProfile> profiles_;
    timing::VviSpec vvi_;
    circuit::TransientOptions transient_;
    Netlist base_;
    long evaluations_ = 0;
};

/// Time-phase MDP over feasible on-chip UDCs, starting from a fixed layout.
class TimeEnv {
public:
    /// Evaluates `start`; throws PreconditionError when it has no violation.
    TimeEnv(TimeEvaluator& evaluator, DecapLayout start, double gamma, int max_steps);

    StepResult reset();
    StepResult step(const ActionVector& action);

    [[nodiscard]] const DecapLayout& layout() const { return layout_; }
    [[nodiscard]] const std::vector<UdcSite>& sites() const { return sites_; }
    [[nodiscard]] const TimeEvaluation& initial() const { return init_; }
    [[nodiscard]] const TimeEvaluation& last() const { return last_; }
    [[nodiscard]] double gamma() const { return gamma_; }
    [[nodiscard]] double reward_of(const TimeEvaluation& e, const DecapLayout& layout) const;

private:
    StepResult make_result(double reward);

    TimeEvaluator* eval_;
    DecapLayout start_;
    double gamma_;
    int max_steps_;
    std::vector<UdcSite> sites_;
    TimeEvaluation init_;
    double scale_ = 0.0;
    DecapLayout layout_;
    TimeEvaluation last_;
    int steps_ = 0;
};

}  // namespace pdn::rl

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pdn/floorplan.hpp"
#include "pdn/layout.hpp"
#include "pdn/rl/env.hpp"

namespace pdn::baseline {

enum class Method { GA, DA };

struct GaConfig {
    int population = 64;
    double crossover = 0.9;  // probability of uniform crossover, else clone
    double mutation = 0.05;  // per-gene reset probability
    int tournament = 3;
    int elite = 2;
};

/// Generalized simulated annealing over a continuous relaxation of the
/// levels, [-0.5, 10.5] per gene, decoded by rounding.
struct DaConfig {
    double initial_temp = 5230.0;
    double visit = 2.62;
    double accept = -5.0;
    double restart_temp_ratio = 2e-5;
    bool local_search = true;  // +-1 coordinate descent after improving chains
};

struct BaselineConfig {
    Method method = Method::GA;
    GaConfig ga;
    DaConfig da;
    long budget = 1000;  // cost evaluations
    std::uint64_t seed = 0;

    void validate() const;
};

struct BaselineResult {
    DecapLayout best_layout;
    double best_cost = 0.0;
    std::vector<double> history;  // best cost after each evaluation
    std::vector<double> current;  // DA: energy of the current state after each evaluation
    long evaluations = 0;
};

using CostFn = std::function<double(const DecapLayout&)>;

/// Genome = levels of every UDC (interposer row-major, then chips);
/// infeasible genes decode to 0.
std::vector<int> encode_genome(const Floorplan& fp, const DecapLayout& layout);
DecapLayout decode_genome(const Floorplan& fp, const std::vector<int>& genome);

BaselineResult ga_optimize(const Floorplan& fp, const CostFn& cost, const BaselineConfig& config);
BaselineResult da_optimize(const Floorplan& fp, const CostFn& cost, const BaselineConfig& config);
BaselineResult optimize(const Floorplan& fp, const CostFn& cost, const BaselineConfig& config);

/// cost = -freq_reward through the shared evaluator.
CostFn freq_cost(rl::FreqEvaluator& evaluator);

}  // namespace pdn::baseline

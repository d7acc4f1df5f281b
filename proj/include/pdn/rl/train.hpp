#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pdn/layout.hpp"
#include "pdn/rl/env.hpp"
#include "pdn/rl/network.hpp"
#include "pdn/rl/ppo.hpp"

namespace pdn::rl {

struct EpisodeRecord {
    int episode = 0;
    int steps = 0;
    double reward = 0.0;  // reward of the episode's final layout
    double mos = 0.0;     // F, final layout
    double mim = 0.0;     // F, final layout
    double best = 0.0;    // best reward seen so far over all evaluations
    long evaluations = 0; // cumulative
    bool success = false;
    double wall_seconds = 0.0;
};

struct TrainResult {
    DecapLayout best_layout;
    double best_reward = -std::numeric_limits<double>::infinity();
    bool best_success = false;
    std::vector<EpisodeRecord> curve;
    PolicyValueNet network;
    long evaluations = 0;
};

/// Runs PPO until `budget` reward evaluations are spent. Every evaluated
/// layout is a candidate for the best-so-far result.
TrainResult train_freq(FreqEnv& env, const PpoConfig& config, long budget, std::uint64_t seed);
TrainResult train_time(TimeEnv& env, const PpoConfig& config, long budget, std::uint64_t seed);

/// splitmix64 finalizer, used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pdn::rl

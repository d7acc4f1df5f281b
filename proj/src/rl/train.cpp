#include "pdn/rl/train.hpp"

#include <chrono>
#include <cmath>

#include "pdn/error.hpp"

namespace pdn::rl {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

struct Rollout {
    Batch batch;
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<char> ends;

    void clear() { *this = Rollout{}; }
};

void normalize(std::vector<double>& a) {
    if (a.size() < 2) return;
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= static_cast<double>(a.size());
    double var = 0.0;
    for (double v : a) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(a.size()));
    for (double& v : a) v = (v - mean) / (sd + 1e-8);
}

template <typename Env>
TrainResult train_impl(Env& env, int channels, const PpoConfig& config, long budget,
                       std::uint64_t seed) {
    config.validate();
    if (budget <= 0) throw InvalidArgument("training budget must be positive");
    const auto t0 = std::chrono::steady_clock::now();

    StepResult first = env.reset();
    TrainResult res;
    res.network = PolicyValueNet(channels, first.state.dims, static_cast<int>(env.sites().size()),
                                 config.network);
    res.network.initialize(mix_seed(seed, 1));
    PolicyValueNet& net = res.network;
    Adam opt(net.params().size(), config.learning_rate);
    std::mt19937_64 sample_rng(mix_seed(seed, 2));
    std::mt19937_64 shuffle_rng(mix_seed(seed, 3));

    Rollout ro;
    int episode = 0;
    while (res.evaluations < budget) {
        StepResult cur = episode == 0 ? std::move(first) : env.reset();
        EpisodeRecord rec;
        rec.episode = episode;
        while (true) {
            const NetOutput out = net.forward(cur.state);
            ActionVector a = sample_action(out.logits, sample_rng);
            const double lp = log_prob(out.logits, a);
            StepResult next = env.step(a);
            ++res.evaluations;
            ++rec.steps;
            if (next.reward > res.best_reward) {
                res.best_reward = next.reward;
                res.best_layout = env.layout();
                res.best_success = next.success;
            }
            const bool stop = next.done || res.evaluations >= budget;
            ro.batch.states.push_back(std::move(cur.state));
            ro.batch.actions.push_back(std::move(a));
            ro.batch.old_log_probs.push_back(lp);
            ro.values.push_back(out.value);
            ro.rewards.push_back(next.reward);
            ro.ends.push_back(stop ? 1 : 0);
            rec.reward = next.reward;
            rec.success = next.success;
            cur = std::move(next);
            if (stop) break;
        }
        rec.mos = env.layout().total_mos();
        rec.mim = env.layout().total_mim();
        rec.best = res.best_reward;
        rec.evaluations = res.evaluations;
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.curve.push_back(rec);
        ++episode;

        if (static_cast<int>(ro.rewards.size()) >= config.rollout && res.evaluations < budget) {
            ro.batch.returns = discounted_returns(ro.rewards, ro.ends, config.discount);
            ro.batch.advantages.resize(ro.rewards.size());
            for (std::size_t i = 0; i < ro.rewards.size(); ++i) {
                ro.batch.advantages[i] = ro.batch.returns[i] - ro.values[i];
            }
            if (config.normalize_advantages) normalize(ro.batch.advantages);
            ppo_update(net, opt, ro.batch, config, shuffle_rng);
            ro.clear();
        }
    }
    return res;
}

}  // namespace

TrainResult train_freq(FreqEnv& env, const PpoConfig& config, long budget, std::uint64_t seed) {
    return train_impl(env, kFreqChannels, config, budget, seed);
}

TrainResult train_time(TimeEnv& env, const PpoConfig& config, long budget, std::uint64_t seed) {
    return train_impl(env, kTimeChannels, config, budget, seed);
}

}  // namespace pdn::rl

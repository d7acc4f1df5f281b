#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pdn/rl/network.hpp"
#include "pdn/rl/state.hpp"

namespace pdn::rl {

struct PpoConfig {
    double clip = 0.2;  // +inf disables clipping
    double discount = 0.99;
    double learning_rate = 3e-4;
    int epochs = 4;
    int rollout = 512;    // minimum transitions per update; whole episodes are kept
    int minibatch = 64;
    double entropy_weight = 0.01;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;  // <= 0 disables gradient clipping
    int episode_steps = 50;
    bool normalize_advantages = false;  // per-update zero mean, unit variance
    NetworkConfig network;

    void validate() const;
};

/// Actions are stored as steps in {-1, 0, +1}; categorical index = step + 1.
struct Batch {
    std::vector<StateTensor> states;
    std::vector<ActionVector> actions;
    std::vector<double> old_log_probs;
    std::vector<double> returns;
    std::vector<double> advantages;

    [[nodiscard]] std::size_t size() const { return states.size(); }
};

struct LossTerms {
    double total = 0.0;
    double surrogate = 0.0;   // mean clipped surrogate (maximized)
    double value_loss = 0.0;  // mean squared error
    double entropy = 0.0;     // mean joint entropy
    double clip_fraction = 0.0;
};

struct LossAndGrad {
    LossTerms terms;
    Eigen::VectorXd grad;
};

/// L = -mean(min(r A, clip(r, 1-eps, 1+eps) A)) + value_coef * mean((R - V)^2)
///     - entropy_weight * mean(H). Gradient is analytic.
LossAndGrad ppo_loss(const PolicyValueNet& net, const Batch& batch,
                     std::span<const std::size_t> indices, double clip, double value_coef,
                     double entropy_weight);

/// Plain policy-gradient objective: -mean(log pi * A) with the same value
/// and entropy terms.
LossAndGrad pg_loss(const PolicyValueNet& net, const Batch& batch,
                    std::span<const std::size_t> indices, double value_coef,
                    double entropy_weight);

class Adam {
public:
    Adam() = default;
    Adam(Eigen::Index size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
    [[nodiscard]] long steps() const { return t_; }

private:
    double lr_ = 0.0, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    Eigen::VectorXd m_, v_;
};

/// Sum of per-site categorical log-probabilities of `action`.
double log_prob(const Eigen::MatrixXd& logits, const ActionVector& action);

/// One categorical draw per site.
ActionVector sample_action(const Eigen::MatrixXd& logits, std::mt19937_64& rng);

/// Discounted reward-to-go, reset after every terminal flag.
std::vector<double> discounted_returns(std::span<const double> rewards,
                                       std::span<const char> episode_end, double discount);

struct UpdateStats {
    LossTerms last;
    int gradient_steps = 0;
};

/// config.epochs passes of shuffled minibatches. Throws NumericFault on a
/// non-finite loss with the batch statistics in the message.
UpdateStats ppo_update(PolicyValueNet& net, Adam& opt, const Batch& batch,
                       const PpoConfig& config, std::mt19937_64& rng);

/// Single full-batch step of the plain policy-gradient objective.
void pg_update(PolicyValueNet& net, Adam& opt, const Batch& batch, const PpoConfig& config);

}  // namespace pdn::rl

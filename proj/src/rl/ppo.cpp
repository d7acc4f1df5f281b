#include "pdn/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn::rl {

namespace {

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& z) {
    Eigen::MatrixXd out(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        const double lse = m + std::log((z.row(i).array() - m).exp().sum());
        out.row(i) = z.row(i).array() - lse;
    }
    return out;
}

void check_action(const ActionVector& a, Eigen::Index sites) {
    if (static_cast<Eigen::Index>(a.size()) != sites) {
        throw InvalidArgument(fmt::format("action length {} does not match {} sites", a.size(), sites));
    }
}

// Shared driver: `policy_term(b, logp, old)` returns the per-sample policy
// objective (to be maximized) and its derivative with respect to logp.
template <typename PolicyTerm>
LossAndGrad objective(const PolicyValueNet& net, const Batch& batch,
                      std::span<const std::size_t> indices, double value_coef,
                      double entropy_weight, PolicyTerm policy_term, double* clip_count) {
    if (indices.empty()) throw InvalidArgument("empty minibatch");
    std::vector<StateTensor> states;
    states.reserve(indices.size());
    for (std::size_t i : indices) states.push_back(batch.states.at(i));
    const auto outs = net.forward(states);
    const double inv = 1.0 / static_cast<double>(indices.size());

    LossAndGrad res;
    std::vector<Eigen::MatrixXd> dlogits(indices.size());
    std::vector<double> dvalue(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const std::size_t b = indices[k];
        const ActionVector& act = batch.actions[b];
        check_action(act, outs[k].logits.rows());
        const Eigen::MatrixXd lp = log_softmax_rows(outs[k].logits);
        const Eigen::MatrixXd p = lp.array().exp().matrix();
        double logp = 0.0;
        for (Eigen::Index j = 0; j < lp.rows(); ++j) logp += lp(j, act[j] + 1);

        const auto [obj, dobj] = policy_term(b, logp);
        const double err = outs[k].value - batch.returns[b];

        // Joint entropy of the factorized policy and its logit gradient.
        Eigen::VectorXd h = -(p.array() * lp.array()).rowwise().sum().matrix();
        const double entropy = h.sum();

        Eigen::MatrixXd d = -p * dobj;
        for (Eigen::Index j = 0; j < lp.rows(); ++j) d(j, act[j] + 1) += dobj;
        d *= -inv;  // loss = -objective
        Eigen::MatrixXd dh = -(p.array() * (lp.array().colwise() + h.array())).matrix();
        d -= entropy_weight * inv * dh;

        dlogits[k] = std::move(d);
        dvalue[k] = 2.0 * value_coef * err * inv;

        res.terms.surrogate += obj * inv;
        res.terms.value_loss += err * err * inv;
        res.terms.entropy += entropy * inv;
    }
    if (clip_count) res.terms.clip_fraction = *clip_count * inv;
    res.terms.total = -res.terms.surrogate + value_coef * res.terms.value_loss -
                      entropy_weight * res.terms.entropy;
    if (!std::isfinite(res.terms.total)) {
        double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin, amax = 0.0;
        for (std::size_t i : indices) {
            rmin = std::min(rmin, batch.returns[i]);
            rmax = std::max(rmax, batch.returns[i]);
            amax = std::max(amax, std::abs(batch.advantages[i]));
        }
        throw NumericFault(fmt::format(
            "non-finite PPO loss (batch {}, returns [{:.6g}, {:.6g}], max |advantage| {:.6g})",
            indices.size(), rmin, rmax, amax));
    }
    res.grad = net.backward(states, dlogits, dvalue);
    return res;
}

void clip_norm(Eigen::VectorXd& g, double max_norm) {
    if (max_norm <= 0.0) return;
    const double n = g.norm();
    if (n > max_norm) g *= max_norm / n;
}

}  // namespace

void PpoConfig::validate() const {
    if (!(clip > 0.0 && (clip < 1.0 || std::isinf(clip)))) {
        throw InvalidArgument(fmt::format("clip ratio must lie in (0, 1), got {}", clip));
    }
    if (!(discount > 0.0 && discount <= 1.0)) {
        throw InvalidArgument(fmt::format("discount must lie in (0, 1], got {}", discount));
    }
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (epochs <= 0 || rollout <= 0 || minibatch <= 0 || episode_steps <= 0) {
        throw InvalidArgument("PPO epochs, rollout, minibatch and episode steps must be positive");
    }
    if (entropy_weight < 0.0 || value_coef < 0.0) {
        throw InvalidArgument("entropy and value weights must be non-negative");
    }
    network.validate();
}

LossAndGrad ppo_loss(const PolicyValueNet& net, const Batch& batch,
                     std::span<const std::size_t> indices, double clip, double value_coef,
                     double entropy_weight) {
    double clipped = 0.0;
    auto term = [&](std::size_t b, double logp) -> std::pair<double, double> {
        const double a = batch.advantages[b];
        const double r = std::exp(logp - batch.old_log_probs[b]);
        const double rc = std::clamp(r, 1.0 - clip, 1.0 + clip);
        if (r * a <= rc * a) return {r * a, r * a};
        clipped += 1.0;
        return {rc * a, 0.0};
    };
    return objective(net, batch, indices, value_coef, entropy_weight, term, &clipped);
}

LossAndGrad pg_loss(const PolicyValueNet& net, const Batch& batch,
                    std::span<const std::size_t> indices, double value_coef,
                    double entropy_weight) {
    auto term = [&](std::size_t b, double logp) -> std::pair<double, double> {
        const double a = batch.advantages[b];
        return {logp * a, a};
    };
    return objective(net, batch, indices, value_coef, entropy_weight, term, nullptr);
}

Adam::Adam(Eigen::Index size, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), b1_(beta1), b2_(beta2), eps_(eps),
      m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (grad.size() != params.size() || m_.size() != params.size()) {
        throw InvalidArgument("optimizer state does not match the parameter vector");
    }
    ++t_;
    m_ = b1_ * m_ + (1.0 - b1_) * grad;
    v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

double log_prob(const Eigen::MatrixXd& logits, const ActionVector& action) {
    check_action(action, logits.rows());
    const Eigen::MatrixXd lp = log_softmax_rows(logits);
    double s = 0.0;
    for (Eigen::Index j = 0; j < lp.rows(); ++j) s += lp(j, action[j] + 1);
    return s;
}

ActionVector sample_action(const Eigen::MatrixXd& logits, std::mt19937_64& rng) {
    const Eigen::MatrixXd p = softmax_rows(logits);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ActionVector a(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
        const double x = u(rng);
        int k = 0;
        double acc = p(j, 0);
        while (k < 2 && x >= acc) acc += p(j, ++k);
        a[j] = k - 1;
    }
    return a;
}

std::vector<double> discounted_returns(std::span<const double> rewards,
                                       std::span<const char> episode_end, double discount) {
    if (rewards.size() != episode_end.size()) throw InvalidArgument("reward/terminal length mismatch");
    std::vector<double> out(rewards.size());
    double g = 0.0;
    for (std::size_t t = rewards.size(); t-- > 0;) {
        if (episode_end[t]) g = 0.0;
        g = rewards[t] + discount * g;
        out[t] = g;
    }
    return out;
}

UpdateStats ppo_update(PolicyValueNet& net, Adam& opt, const Batch& batch,
                       const PpoConfig& config, std::mt19937_64& rng) {
    config.validate();
    UpdateStats stats;
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto mb = static_cast<std::size_t>(config.minibatch);
    for (int e = 0; e < config.epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += mb) {
            const std::size_t n = std::min(mb, order.size() - start);
            std::span<const std::size_t> idx(order.data() + start, n);
            LossAndGrad lg = ppo_loss(net, batch, idx, config.clip, config.value_coef,
                                      config.entropy_weight);
            clip_norm(lg.grad, config.max_grad_norm);
            opt.step(net.params(), lg.grad);
            stats.last = lg.terms;
            ++stats.gradient_steps;
        }
    }
    return stats;
}

void pg_update(PolicyValueNet& net, Adam& opt, const Batch& batch, const PpoConfig& config) {
    std::vector<std::size_t> idx(batch.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    LossAndGrad lg = pg_loss(net, batch, idx, config.value_coef, config.entropy_weight);
    clip_norm(lg.grad, config.max_grad_norm);
    opt.step(net.params(), lg.grad);
}

}  // namespace pdn::rl
